"""Independent brute-force constraint checker used as a test oracle.

Deliberately written from scratch against the documented connection
rules, sharing no code with flowtune.model: kinds are plain strings,
degrees are recounted by scanning the raw edge list for every node.
"""

# kind -> (min_in, max_in, min_out, max_out, allowed inputs, allowed outputs)
RULES = {
    "source": (0, 0, 1, 3, set(), {"pool", "random_gate"}),
    "random_gate": (1, 1, 2, 3, {"source", "converter"}, {"pool", "converter"}),
    "pool": (1, 2, 0, 3, {"source", "random_gate", "converter"}, {"converter", "drain"}),
    "converter": (1, 3, 1, 1, {"pool", "random_gate"}, {"pool", "random_gate"}),
    "drain": (1, 2, 0, 0, {"pool"}, set()),
}


def _kind_name(kind) -> str:
    name = kind.value if hasattr(kind, "value") else str(kind)
    return "pool" if name == "fixed_pool" else name


def count_node_violations(graph, node_id: str) -> int:
    kinds = {n.id: _kind_name(n.kind) for n in graph.nodes}
    rule = RULES[kinds[node_id]]
    min_in, max_in, min_out, max_out, allowed_in, allowed_out = rule

    violations = 0
    in_degree = sum(1 for e in graph.edges if e.dst == node_id)
    out_degree = sum(1 for e in graph.edges if e.src == node_id)
    if in_degree < min_in:
        violations += 1
    if in_degree > max_in:
        violations += 1
    if out_degree < min_out:
        violations += 1
    if out_degree > max_out:
        violations += 1
    for e in graph.edges:
        if e.dst == node_id and kinds[e.src] not in allowed_in:
            violations += 1
        if e.src == node_id and kinds[e.dst] not in allowed_out:
            violations += 1
    return violations


def count_violations(graph) -> int:
    return sum(count_node_violations(graph, n.id) for n in graph.nodes)


def max_degree_violations(graph, node_id: str) -> int:
    """Only the max_in/max_out part of the violation count."""
    kinds = {n.id: _kind_name(n.kind) for n in graph.nodes}
    _, max_in, _, max_out, _, _ = RULES[kinds[node_id]]
    violations = 0
    if sum(1 for e in graph.edges if e.dst == node_id) > max_in:
        violations += 1
    if sum(1 for e in graph.edges if e.src == node_id) > max_out:
        violations += 1
    return violations
