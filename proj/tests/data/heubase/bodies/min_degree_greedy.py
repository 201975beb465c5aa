def min_degree_greedy(num_nodes, edges):
    adj = [set() for _ in range(num_nodes)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    alive = set(range(num_nodes))
    chosen = [0] * num_nodes
    while alive:
        v = min(alive, key=lambda x: (len(adj[x] & alive), x))
        chosen[v] = 1
        alive -= adj[v] | {v}
    return chosen
