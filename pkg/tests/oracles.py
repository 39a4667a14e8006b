"""Independent reference evaluators used to check the engine.

Nothing here imports the engine modules: the graph oracle works on plain
lists of nodes, edges and interaction events and does its own latest-wins
bookkeeping, in exact rational arithmetic.
"""

import math
import random
from fractions import Fraction

EXPLICIT = {"like", "dislike", "comment"}
IMPLICIT_POLARITY = {"consume": 1, "scroll": 1, "fullscreen": 1, "dismiss": -1}
ROOT_TYPES = ["consume", "scroll", "fullscreen", "comment", "like", "dislike"]
WIDGET_TYPES = ["scroll", "dismiss", "like", "dislike", "comment"]


class PlainGraph:
    """Graph description as plain data, independent of ContextGraph."""

    def __init__(self):
        self.persons = []
        self.assets = {}  # id -> "root" | "sub"
        self.keywords = []
        self.edges = []  # (kind, src, dst)
        self.events = []  # (person, asset, type, polarity, intensity, ts)

    def adjacency(self):
        adj = {n: set() for n in list(self.assets) + self.keywords}
        for _kind, a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def effective(self):
        """Latest explicit event and set of implicit types per (person, asset)."""
        explicit, implicit = {}, {}
        for person, asset, itype, polarity, intensity, _ts in self.events:
            if itype in EXPLICIT:
                if itype == "like":
                    w = Fraction(1)
                elif itype == "dislike":
                    w = Fraction(-1)
                else:
                    w = Fraction(intensity) if polarity >= 0 else -Fraction(intensity)
                explicit[(person, asset)] = w
            else:
                implicit.setdefault((person, asset), set()).add(itype)
        return explicit, implicit


def direct_oracle(g, person, node, t_root=6, t_widget=5):
    """(value, interaction count) of the person's own interactions with node."""
    if node not in g.assets:
        return Fraction(0), 0
    explicit, implicit = g.effective()
    value, count = Fraction(0), 0
    if (person, node) in explicit:
        value += explicit[(person, node)]
        count += 1
    t = t_root if g.assets[node] == "root" else t_widget
    for itype in implicit.get((person, node), ()):
        value += Fraction(IMPLICIT_POLARITY[itype], t - 1)
        count += 1
    return value, count


def relevance_oracle(g, person, asset, max_depth=2, t_root=6, t_widget=5):
    """Sum over every simple path of at most max_depth hops from asset.

    A path v0..vk contributes direct(vk) times the product over its inner
    nodes of 1 / (number of neighbours of v_j not already on the path + 1).
    """
    adj = g.adjacency()
    total, terms = Fraction(0), 0
    stack = [((asset,), Fraction(1))]
    while stack:
        path, factor = stack.pop()
        value, count = direct_oracle(g, person, path[-1], t_root, t_widget)
        total += factor * value
        terms += count
        if len(path) - 1 >= max_depth:
            continue
        fresh = [x for x in adj[path[-1]] if x not in path]
        for x in fresh:
            stack.append((path + (x,), factor / (len(fresh) + 1)))
    return total, terms


def random_plain_graph(rng: random.Random, max_nodes=50):
    g = PlainGraph()
    n_total = rng.randint(3, max_nodes)
    n_persons = max(1, n_total // 5)
    n_keywords = rng.randint(0, max(0, (n_total - n_persons) // 4))
    n_assets = max(1, n_total - n_persons - n_keywords)
    g.persons = [f"p{i}" for i in range(n_persons)]
    g.keywords = [f"k:{i}" for i in range(n_keywords)]
    roots = []
    for i in range(n_assets):
        if not roots or rng.random() < 0.4:
            g.assets[f"a{i}"] = "root"
            roots.append(f"a{i}")
        else:
            g.assets[f"a{i}"] = "sub"
            g.edges.append(("is_root_asset_of", rng.choice(roots), f"a{i}"))
    for a in g.assets:
        for k in g.keywords:
            if rng.random() < 0.25:
                g.edges.append(("has_keywords", a, k))
    ts = 0
    for _ in range(rng.randint(0, 4 * n_total)):
        person = rng.choice(g.persons)
        asset = rng.choice(list(g.assets))
        itype = rng.choice(ROOT_TYPES if g.assets[asset] == "root" else WIDGET_TYPES)
        ts += 1
        if itype == "comment":
            g.events.append((person, asset, itype, rng.choice([-1.0, 1.0]), round(rng.random(), 3), ts))
        else:
            g.events.append((person, asset, itype, None, 0.0, ts))
    return g


def to_context_graph(g):
    from samrec.graph import ContextGraph, Interaction, KeywordNode, StructuralEdge

    graph = ContextGraph()
    for p in g.persons:
        graph.add_person(p)
    for a, kind in g.assets.items():
        graph.add_asset(a, kind)
    for k in g.keywords:
        graph.add_node(KeywordNode(k[2:], k))
    for kind, a, b in g.edges:
        graph.add_structural_edge(StructuralEdge(kind, a, b))
    for person, asset, itype, polarity, intensity, ts in g.events:
        graph.record_interaction(Interaction(person, asset, itype, polarity, intensity, None, ts))
    return graph


# -- collaborative filtering ---------------------------------------------------


def pearson_oracle(ra: dict, ru: dict):
    """Correlation over co-rated items with full-vector means; None if undefined."""
    common = [k for k in ra if k in ru]
    if len(common) < 2:
        return None
    if len({ra[k] for k in common}) == 1 or len({ru[k] for k in common}) == 1:
        return None
    mean_a = sum(ra.values()) / len(ra)
    mean_u = sum(ru.values()) / len(ru)
    num = 0.0
    sa = 0.0
    su = 0.0
    for k in common:
        num += (ra[k] - mean_a) * (ru[k] - mean_u)
        sa += (ra[k] - mean_a) ** 2
        su += (ru[k] - mean_u) ** 2
    return num / math.sqrt(sa * su)


def predict_oracle(ra: dict, item, others: list):
    mean_a = sum(ra.values()) / len(ra) if ra else 0.0
    num = den = 0.0
    for ru in others:
        if item not in ru:
            continue
        c = pearson_oracle(ra, ru)
        if c is None or c <= 0:
            continue
        mean_u = sum(ru.values()) / len(ru)
        num += (ru[item] - mean_u) * c
        den += c
    p = mean_a if den == 0 else mean_a + num / den
    return min(1.0, max(-1.0, p))


def random_ratings(rng: random.Random, items, density=0.6, discrete=False):
    out = {}
    for i in items:
        if rng.random() < density:
            out[i] = rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0]) if discrete else rng.uniform(-1, 1)
    return out
