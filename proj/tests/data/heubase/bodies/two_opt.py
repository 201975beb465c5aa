import math


def two_opt(coords, tour):
    best = list(tour)
    n = len(best)
    improved = True
    while improved:
        improved = False
        for i in range(1, n - 1):
            for j in range(i + 1, n):
                a, b = coords[best[i - 1]], coords[best[i]]
                c, d = coords[best[j]], coords[best[(j + 1) % n]]
                if math.dist(a, c) + math.dist(b, d) < math.dist(a, b) + math.dist(c, d) - 1e-12:
                    best[i:j + 1] = reversed(best[i:j + 1])
                    improved = True
    return best
