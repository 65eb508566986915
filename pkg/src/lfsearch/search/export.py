from __future__ import annotations

import json

from .tree import RunResult


def _winning_ids(nodes: list[dict], win_node: int | None) -> set[int]:
    by_id = {n["id"]: n for n in nodes}
    ids = set()
    while win_node is not None:
        ids.add(win_node)
        win_node = by_id[win_node]["parent"]
    return ids


def _quote(text: str, raw: bool = False) -> str:
    if not raw:
        text = text.replace("\\", "\\\\")
    return '"' + text.replace('"', '\\"') + '"'


def tree_to_dot(nodes: list[dict], win_node: int | None = None) -> str:
    on_path = _winning_ids(nodes, win_node)
    lines = ["digraph search {", "  node [shape=box, fontname=monospace];"]
    for n in nodes:
        value = "-" if n["value"] is None else f"{n['value']:.2f}"
        label = f"#{n['id']} d={n['depth']}\\nV={value} N={n['visits']}"
        attrs = [f"label={_quote(label, raw=True)}"]
        if n["id"] in on_path:
            attrs += ["color=red", "penwidth=2"]
        elif n.get("terminal"):
            attrs.append("style=dashed")
        lines.append(f"  n{n['id']} [{', '.join(attrs)}];")
    for n in nodes:
        if n["parent"] is None:
            continue
        attrs = [f"label={_quote(n['label'] or '')}"]
        if n["id"] in on_path:
            attrs += ["color=red", "penwidth=2"]
        lines.append(f"  n{n['parent']} -> n{n['id']} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_json(nodes: list[dict], win_node: int | None = None) -> str:
    path = sorted(_winning_ids(nodes, win_node))
    return json.dumps({"nodes": nodes, "winning_nodes": path}, indent=2, sort_keys=True) + "\n"


def export_tree(result: RunResult | dict, fmt: str = "dot") -> str:
    """Render a run's tree as Graphviz DOT or JSON.

    ``result`` may be a RunResult or the ``run_end`` event of a stored trace.
    """
    if isinstance(result, RunResult):
        end = result.trace.of("run_end")[-1]
    else:
        end = result
    nodes, win = end["tree"], end.get("win_node")
    if fmt == "dot":
        return tree_to_dot(nodes, win)
    if fmt == "json":
        return tree_to_json(nodes, win)
    raise ValueError(f"unknown export format {fmt!r}")
