import math


def nearest_neighbor_tour(coords, start):
    tour = [start]
    left = set(range(len(coords))) - {start}
    while left:
        here = coords[tour[-1]]
        nxt = min(left, key=lambda j: math.dist(here, coords[j]))
        tour.append(nxt)
        left.discard(nxt)
    return tour
