"""Scripted-world builders for offline runs and tests.

Everything here produces ScriptedWorld instances plus ground-truth
descriptions that tests can check against independently. Worlds are
deterministic: builders take an explicit RNG seed and never consult
global randomness.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from kbforge.gateway.providers import PHRASE_KEY_PREFIX, TRANSPORT_ERROR_MARKER, ScriptedWorld


def triples_payload(subject: str, pairs: Iterable[tuple[str, str]]) -> dict:
    return {"triples": [{"subject": subject, "predicate": p, "object": o} for p, o in pairs]}


MALFORMED_PAYLOAD = {"facts": "not a triple list"}


class WorldBuilder:
    """Accumulates scripted records, then builds a ScriptedWorld."""

    def __init__(self) -> None:
        self.records: list[dict] = []

    def add(self, template: str, key: str, payload: Any = None, sequence: list | None = None) -> "WorldBuilder":
        rec: dict[str, Any] = {"template": template, "key": key}
        if sequence is not None:
            rec["sequence"] = sequence
        else:
            rec["payload"] = payload
        self.records.append(rec)
        return self

    def elicit(self, subject: str, pairs: Iterable[tuple[str, str]]) -> "WorldBuilder":
        return self.add("elicit", subject, triples_payload(subject, pairs))

    def elicit_empty(self, subject: str) -> "WorldBuilder":
        return self.add("elicit", subject, {"triples": []})

    def elicit_malformed(self, subject: str) -> "WorldBuilder":
        return self.add("elicit", subject, MALFORMED_PAYLOAD)

    def elicit_flaky(self, subject: str, pairs: Iterable[tuple[str, str]]) -> "WorldBuilder":
        # one transport fault, then the real payload on retry
        return self.add("elicit", subject, sequence=[TRANSPORT_ERROR_MARKER, triples_payload(subject, pairs)])

    def elicit_sequence(self, subject: str, payloads: Sequence[Any]) -> "WorldBuilder":
        return self.add("elicit", subject, sequence=list(payloads))

    def mark_entities(self, phrases: Iterable[str]) -> "WorldBuilder":
        for phrase in phrases:
            self.add("ner", PHRASE_KEY_PREFIX + phrase, {"is_named_entity": True})
        return self

    def mark_literals(self, phrases: Iterable[str]) -> "WorldBuilder":
        for phrase in phrases:
            self.add("ner", PHRASE_KEY_PREFIX + phrase, {"is_named_entity": False})
        return self

    def seed_taxonomy(self, root: dict) -> "WorldBuilder":
        return self.add("taxo_seed", "seed", {"root": root})

    def score(self, class_name: str, value: Any) -> "WorldBuilder":
        return self.add("taxo_score", class_name, {"score": value})

    def superclass(self, class_name: str, node_name: str, choice: str) -> "WorldBuilder":
        return self.add("taxo_superclass", f"{class_name}@{node_name}", {"choice": choice})

    def update(self, class_name: str, node_name: str, root: dict) -> "WorldBuilder":
        return self.add("taxo_update", f"{class_name}@{node_name}", {"root": root})

    def search(self, query: str, snippets: list[dict]) -> "WorldBuilder":
        return self.add("search", query, {"snippets": snippets})

    def search_flaky(self, query: str, snippets: list[dict]) -> "WorldBuilder":
        return self.add("search", query, sequence=[TRANSPORT_ERROR_MARKER, {"snippets": snippets}])

    def search_dead(self, query: str) -> "WorldBuilder":
        return self.add("search", query, sequence=[TRANSPORT_ERROR_MARKER])

    def entity_verdict(self, label: str, verdict: str) -> "WorldBuilder":
        return self.add("entail_entity", label, {"verdict": verdict})

    def triple_verdict(self, claim: str, verdict: str) -> "WorldBuilder":
        return self.add("entail_triple", claim, {"verdict": verdict})

    def refkb(self, label: str, match: str) -> "WorldBuilder":
        return self.add("refkb", label, {"match": match})

    def build(self) -> ScriptedWorld:
        return ScriptedWorld(self.records)


def node(name: str, *children: dict) -> dict:
    return {"name": name, "children": list(children)}


# -- tiny BFS trace world ---------------------------------------------------


def trace_world() -> ScriptedWorld:
    """Seed A; A -> {B, C}; B -> {C, D}; C and D answer empty."""
    b = WorldBuilder()
    b.elicit("A", [("relatedTo", "B"), ("relatedTo", "C"), ("instanceOf", "Letter")])
    b.elicit("B", [("relatedTo", "C"), ("relatedTo", "D")])
    b.elicit_empty("C")
    b.elicit_empty("D")
    b.mark_entities(["B", "C", "D"])
    return b.build()


# -- synthetic crawl world --------------------------------------------------


@dataclass
class SyntheticTruth:
    seed: str
    max_depth: int
    depth_of: dict[str, int]
    adjacency: dict[str, list[str]]
    payload_pairs: dict[str, list[tuple[str, str]]]
    empty_subjects: set[str]
    malformed_subjects: set[str]
    flaky_subjects: set[str]
    disconnected: set[str]

    def reachable(self) -> set[str]:
        """Independent BFS with a visited set, capped at max_depth."""
        visited = {self.seed}
        frontier = [self.seed]
        depth = 1
        while frontier and depth < self.max_depth:
            nxt: list[str] = []
            for label in frontier:
                for obj in self.adjacency.get(label, ()):
                    if obj not in visited:
                        visited.add(obj)
                        nxt.append(obj)
            frontier = nxt
            depth += 1
        return visited


_LAYER_SIZES = (1, 25, 45, 60, 70, 75, 70, 55, 40, 29)  # depths 1..10, total 470
_BEYOND_CAP = 20
_DISCONNECTED = 10

_CLASS_POOL = ("Person", "Organization", "City", "Concept", "Artifact", "Event")


def synthetic_world(rng_seed: int = 20240115, max_depth: int = 10) -> tuple[ScriptedWorld, SyntheticTruth]:
    """A 500-entity layered world with empties, parse failures, and retries.

    470 entities sit at BFS depths 1..10, 20 are referenced only by
    depth-10 subjects (discoverable but past the cap), 10 are never
    referenced at all. Extra cross and back edges point only at equal or
    shallower depths so the layer assignment is exactly the BFS depth.
    """
    rng = random.Random(rng_seed)
    layers: list[list[str]] = []
    counter = 0
    for size in _LAYER_SIZES:
        layers.append([f"Topic {counter + i:04d}" for i in range(size)])
        counter += size
    beyond = [f"Topic {counter + i:04d}" for i in range(_BEYOND_CAP)]
    counter += _BEYOND_CAP
    disconnected = [f"Topic {counter + i:04d}" for i in range(_DISCONNECTED)]

    depth_of: dict[str, int] = {}
    for d, layer in enumerate(layers, start=1):
        for label in layer:
            depth_of[label] = d

    # discovery tree: every node at depth d+1 is an object of a depth-d parent
    children_of: dict[str, list[str]] = {label: [] for layer in layers for label in layer}
    for d in range(1, len(layers)):
        for child in layers[d]:
            parent = rng.choice(layers[d - 1])
            children_of[parent].append(child)
    for child in beyond:
        parent = rng.choice(layers[-1])
        children_of[parent].append(child)

    all_subjects = [label for layer in layers for label in layer] + beyond + disconnected

    # leaves of the discovery tree may be empty or malformed answerers
    leaves = [label for label in depth_of if not children_of[label] and depth_of[label] >= 4]
    rng.shuffle(leaves)
    empty_subjects = set(leaves[:18])
    malformed_subjects = set(leaves[18:28])
    flaky_candidates = [
        label for label in depth_of
        if label not in empty_subjects and label not in malformed_subjects and depth_of[label] in (2, 5)
    ]
    flaky_subjects = set(rng.sample(flaky_candidates, 3))

    builder = WorldBuilder()
    adjacency: dict[str, list[str]] = {}
    payload_pairs: dict[str, list[tuple[str, str]]] = {}

    for label in all_subjects:
        if label in empty_subjects:
            builder.elicit_empty(label)
            adjacency[label] = []
            continue
        if label in malformed_subjects:
            builder.elicit_malformed(label)
            adjacency[label] = []
            continue
        d = depth_of.get(label, max_depth + 1)
        pairs: list[tuple[str, str]] = [("instanceOf", rng.choice(_CLASS_POOL))]
        entity_objects = list(children_of.get(label, []))
        # cross edges at equal-or-shallower target depth never shorten BFS paths
        if label in depth_of:
            pool = [o for ly in layers[: min(d + 1, len(layers))] for o in ly if o != label]
            for extra in rng.sample(pool, k=min(len(pool), rng.randint(0, 3))):
                if extra not in entity_objects:
                    entity_objects.append(extra)
        for obj in entity_objects:
            pairs.append((rng.choice(("relatedTo", "linkedWith", "seeAlso")), obj))
        pairs.append(("establishedIn", str(rng.randint(1800, 2023))))
        pairs.append(("recordedOn", f"{rng.randint(1950, 2020)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"))
        if rng.random() < 0.3:
            pairs.append(("website", f"https://example.org/{label.replace(' ', '-').lower()}"))
        if rng.random() < 0.2:
            pairs.append(("summary", "a deliberately verbose free-text description " * 4))
        if label in flaky_subjects:
            builder.elicit_flaky(label, pairs)
        else:
            builder.elicit(label, pairs)
        adjacency[label] = entity_objects
        payload_pairs[label] = pairs

    builder.mark_entities(all_subjects)

    truth = SyntheticTruth(
        seed=layers[0][0],
        max_depth=max_depth,
        depth_of=depth_of,
        adjacency=adjacency,
        payload_pairs=payload_pairs,
        empty_subjects=empty_subjects,
        malformed_subjects=malformed_subjects,
        flaky_subjects=flaky_subjects,
        disconnected=set(disconnected),
    )
    return builder.build(), truth


# -- consistency probe world ------------------------------------------------


@dataclass
class ConsistencyTruth:
    subject: str
    cluster_sizes: list[int]
    cluster_means: list[float]
    parse_failures: int
    run_counts: list[int]


def consistency_world(subject: str = "Vannevar Bush", rng_seed: int = 7) -> tuple[ScriptedWorld, ConsistencyTruth]:
    """100 elicitation runs: 52 around 21 triples, 32 around 38, a distant
    6-run cluster near 55, and 10 malformed payloads."""
    rng = random.Random(rng_seed)
    pool = [(f"property{i:02d}", f"value {i:02d}") for i in range(79)]
    core = pool[:14]

    def run_payload(count: int) -> dict:
        extra = rng.sample(pool[14:], count - len(core))
        return triples_payload(subject, core + extra)

    entries: list[tuple[int, Any]] = []
    a_counts = [(20, 21, 22, 21)[i % 4] for i in range(52)]
    b_counts = [(35, 38, 41, 38)[i % 4] for i in range(32)]
    c_counts = [(54, 55, 56)[i % 3] for i in range(6)]
    for c in a_counts + b_counts + c_counts:
        entries.append((c, run_payload(c)))
    for _ in range(10):
        entries.append((-1, MALFORMED_PAYLOAD))
    rng.shuffle(entries)

    builder = WorldBuilder()
    builder.elicit_sequence(subject, [payload for _, payload in entries])
    truth = ConsistencyTruth(
        subject=subject,
        cluster_sizes=[52, 32, 6],
        cluster_means=[21.0, 38.0, 55.0],
        parse_failures=10,
        run_counts=[c for c, _ in entries if c >= 0],
    )
    return builder.build(), truth


# -- taxonomy world ---------------------------------------------------------


@dataclass
class TaxonomyTruth:
    classes: list[str]
    scores: dict[str, int]
    parent_of: dict[str, str]
    seed_root: dict
    fallback_classes: set[str]
    scripted_update_classes: set[str]


def taxonomy_world(n_classes: int = 200, rng_seed: int = 11) -> tuple[ScriptedWorld, TaxonomyTruth]:
    """A world steering 200 classes into a known tree.

    Ground truth: a seed taxonomy of six branches under Thing, classes
    attached under it across three tiers. Superclass answers walk the
    ground-truth path. Most update calls are left unscripted (the builder
    falls back to direct attachment after the retry); a handful return a
    well-formed updated subtree to exercise the success path, and one
    returns a subtree that drops an existing name to exercise the
    malformed-update fallback.
    """
    rng = random.Random(rng_seed)
    seed_branches = ["Agent", "Place", "Work", "Event", "Object", "Abstraction"]
    seed_root = node("Thing", *(node(b) for b in seed_branches))

    tier1 = [f"Category {i:02d}" for i in range(18)]
    remaining = [f"Class {i:03d}" for i in range(n_classes - len(tier1))]
    split = len(remaining) * 2 // 3
    tier2 = remaining[:split]
    tier3 = remaining[split:]

    parent_of: dict[str, str] = {}
    scores: dict[str, int] = {}
    for c in tier1:
        parent_of[c] = rng.choice(seed_branches)
        scores[c] = rng.choice((2, 3))
    for c in tier2:
        parent_of[c] = rng.choice(tier1)
        scores[c] = rng.choice((5, 6))
    for c in tier3:
        parent_of[c] = rng.choice(tier2)
        scores[c] = rng.choice((8, 9, 10))

    classes = tier1 + tier2 + tier3

    def path_to(cls: str) -> list[str]:
        path: list[str] = []
        cur = parent_of[cls]
        while True:
            path.append(cur)
            if cur in seed_branches:
                path.append("Thing")
                break
            cur = parent_of[cur]
        return list(reversed(path))  # Thing, branch, ..., parent

    builder = WorldBuilder()
    builder.seed_taxonomy(seed_root)
    for c in classes:
        builder.score(c, scores[c])
        path = path_to(c)
        # at each ancestor that has children, answer with the next hop
        for hop, nxt in zip(path, path[1:] + [None]):
            if nxt is not None:
                builder.superclass(c, hop, nxt)
        # at the parent itself: no child matches, fall through to update

    # scripted successful updates for a few earliest tier-1 inserts: the
    # parent branch is still a leaf when they arrive, so the subtree seen
    # by the update call is just the branch node itself
    scripted_update_classes: set[str] = set()
    by_insertion = sorted(classes, key=lambda c: (scores[c], c))
    branches_used: set[str] = set()
    for c in by_insertion:
        p = parent_of[c]
        if p in seed_branches and p not in branches_used and len(scripted_update_classes) < 4:
            branches_used.add(p)
            scripted_update_classes.add(c)
            builder.update(c, p, node(p, node(c)))

    # one malformed update: drops an existing branch name, twice in a row
    bad = node("Thing", *(node(b) for b in seed_branches[1:]))  # Agent missing
    fallback_demo = by_insertion[-1]
    builder.update(fallback_demo, parent_of[fallback_demo], bad)

    truth = TaxonomyTruth(
        classes=classes,
        scores=scores,
        parent_of=parent_of,
        seed_root=seed_root,
        fallback_classes={fallback_demo},
        scripted_update_classes=scripted_update_classes,
    )
    return builder.build(), truth


# -- evaluation rate worlds -------------------------------------------------


@dataclass
class RatesTruth:
    entity_labels: list[str]
    entity_expected: dict[str, str]
    triple_claims: list[tuple[str, str, str]]
    triple_expected: dict[tuple[str, str, str], str]


def rates_world(rng_seed: int = 3) -> tuple[ScriptedWorld, RatesTruth]:
    """Search plus judge scripts reproducing the 74/9/17 and 31/61/1/7 mixes.

    Ten of the unverifiable entities get zero snippets (the no-evidence
    rule decides them without a judge); everything else flows through the
    scripted judge.
    """
    rng = random.Random(rng_seed)
    builder = WorldBuilder()

    entity_labels = [f"Probe Entity {i:03d}" for i in range(100)]
    verdicts = ["verifiable"] * 74 + ["plausible"] * 9 + ["unverifiable"] * 17
    rng.shuffle(verdicts)
    entity_expected: dict[str, str] = {}
    zero_snippet_budget = 10
    for label, verdict in zip(entity_labels, verdicts):
        entity_expected[label] = verdict
        if verdict == "unverifiable" and zero_snippet_budget > 0:
            zero_snippet_budget -= 1
            builder.search(label, [])
            continue
        builder.search(label, [{"title": label, "snippet": f"about {label}", "url": "https://e.org"}])
        builder.entity_verdict(label, verdict)

    triple_claims = [(f"Probe Entity {i:03d}", "relatedTo", f"Probe Object {i:03d}") for i in range(100)]
    tverdicts = ["entailed"] * 31 + ["plausible"] * 61 + ["implausible"] * 1 + ["false"] * 7
    rng.shuffle(tverdicts)
    triple_expected: dict[tuple[str, str, str], str] = {}
    for (s, p, o), verdict in zip(triple_claims, tverdicts):
        triple_expected[(s, p, o)] = verdict
        builder.search(f"{s} {o}", [{"title": s, "snippet": f"{s} and {o}", "url": "https://e.org"}])
        builder.triple_verdict(f"{s} {p} {o}", verdict)

    truth = RatesTruth(entity_labels, entity_expected, triple_claims, triple_expected)
    return builder.build(), truth


def overlap_world() -> tuple[ScriptedWorld, dict[str, str]]:
    """200 labels: 48 exact, 13 fuzzy, 139 novel (novel = unmatched)."""
    builder = WorldBuilder()
    expected: dict[str, str] = {}
    for i in range(200):
        label = f"Sample Label {i:03d}"
        if i < 48:
            expected[label] = "exact"
            builder.refkb(label, "exact")
        elif i < 61:
            expected[label] = "fuzzy"
            builder.refkb(label, "fuzzy")
        else:
            expected[label] = "novel"
    return builder.build(), expected


# -- demo world: one coherent multi-layer story -----------------------------


VANNEVAR_TRIPLES: list[tuple[str, str, bool]] = [
    ("instanceOf", "Person", False),
    ("instanceOf", "Scientist", False),
    ("instanceOf", "Engineer", False),
    ("birthDate", "1890-03-11", False),
    ("birthPlace", "Everett, Massachusetts", True),
    ("deathDate", "1974-06-28", False),
    ("deathPlace", "Belmont, Massachusetts", True),
    ("nationality", "American", False),
    ("almaMater", "Tufts College", True),
    ("almaMater", "Massachusetts Institute of Technology", True),
    ("almaMater", "Harvard University", True),
    ("field", "Electrical engineering", False),
    ("knownFor", "Memex", True),
    ("knownFor", "Differential analyzer", True),
    ("knownFor", "As We May Think", True),
    ("notableWork", "Science, the Endless Frontier", True),
    ("employer", "Massachusetts Institute of Technology", True),
    ("employer", "Carnegie Institution of Washington", True),
    ("position", "Dean of the MIT School of Engineering", False),
    ("headOf", "Office of Scientific Research and Development", True),
    ("headOf", "National Defense Research Committee", True),
    ("founded", "Raytheon", True),
    ("foundedYear", "1922", False),
    ("doctoralStudent", "Claude Shannon", True),
    ("doctoralStudent", "Frederick Terman", True),
    ("doctoralAdvisor", "Arthur Edwin Kennelly", True),
    ("award", "IEEE Edison Medal", True),
    ("award", "Public Welfare Medal", True),
    ("award", "Hoover Medal", True),
    ("award", "National Medal of Science", True),
    ("memberOf", "National Academy of Sciences", True),
    ("memberOf", "American Academy of Arts and Sciences", True),
    ("spouse", "Phoebe Clara Davis", True),
    ("children", "2", False),
    ("advisedProject", "Manhattan Project", True),
    ("influenced", "Douglas Engelbart", True),
    ("influenced", "Ted Nelson", True),
    ("residence", "Belmont, Massachusetts", True),
    ("occupation", "Inventor", False),
    ("occupation", "Science administrator", False),
    ("description", "American engineer, inventor and science administrator", False),
]

_DEMO_LAYER2: dict[str, list[tuple[str, str, bool]]] = {
    "Everett, Massachusetts": [
        ("instanceOf", "City", False),
        ("locatedIn", "Massachusetts", True),
        ("population", "49075", False),
        ("incorporatedOn", "1870-03-09", False),
    ],
    "Belmont, Massachusetts": [
        ("instanceOf", "City", False),
        ("locatedIn", "Massachusetts", True),
        ("population", "27295", False),
    ],
    "Tufts College": [
        ("isA", "University", False),
        ("locatedIn", "Medford, Massachusetts", True),
        ("foundedYear", "1852", False),
    ],
    "Massachusetts Institute of Technology": [
        ("instanceOf", "University", False),
        ("locatedIn", "Cambridge, Massachusetts", True),
        ("foundedYear", "1861", False),
        ("founder", "William Barton Rogers", True),
        ("motto", "Mens et Manus", False),
    ],
    "Harvard University": [
        ("instanceOf", "University", False),
        ("locatedIn", "Cambridge, Massachusetts", True),
        ("foundedYear", "1636", False),
    ],
    "Memex": [
        ("instanceOf", "Concept", False),
        ("proposedBy", "Vannevar Bush", True),
        ("describedIn", "As We May Think", True),
        ("yearProposed", "1945", False),
    ],
    "Differential analyzer": [
        ("instanceOf", "Machine", False),
        ("inventor", "Vannevar Bush", True),
        ("yearBuilt", "1931", False),
    ],
    "As We May Think": [
        ("instanceOf", "Essay", False),
        ("author", "Vannevar Bush", True),
        ("publishedIn", "The Atlantic Monthly", True),
        ("publicationDate", "1945-07-01", False),
    ],
    "Science, the Endless Frontier": [
        ("instanceOf", "Report", False),
        ("author", "Vannevar Bush", True),
        ("publicationDate", "1945-07-25", False),
    ],
    "Carnegie Institution of Washington": [
        ("InstanceOf", "Organization", False),
        ("locatedIn", "Washington, D.C.", True),
        ("foundedYear", "1902", False),
    ],
    "Office of Scientific Research and Development": [
        ("instanceOf", "Government agency", False),
        ("country", "United States", True),
        ("establishedIn", "1941", False),
        ("dissolvedIn", "1947", False),
    ],
    "National Defense Research Committee": [
        ("instanceOf", "Government agency", False),
        ("country", "United States", True),
        ("establishedIn", "1940", False),
    ],
    "Raytheon": [
        ("instanceOf", "Company", False),
        ("industry", "Defense", False),
        ("headquarters", "Waltham, Massachusetts", True),
        ("foundedYear", "1922", False),
    ],
    "Claude Shannon": [
        ("instanceOf", "Person", False),
        ("isA", "Scientist", False),
        ("birthDate", "1916-04-30", False),
        ("knownFor", "Information theory", False),
        ("employer", "Bell Labs", True),
        ("doctoralAdvisor", "Vannevar Bush", True),
    ],
    "Frederick Terman": [
        ("instanceOf", "Person", False),
        ("birthDate", "1900-06-07", False),
        ("employer", "Stanford University", True),
    ],
    "Arthur Edwin Kennelly": [
        ("instanceOf", "Person", False),
        ("birthDate", "1861-12-17", False),
        ("field", "Electrical engineering", False),
    ],
    "IEEE Edison Medal": [
        ("instanceOf", "Award", False),
        ("awardedBy", "IEEE", True),
        ("firstAwarded", "1909", False),
    ],
    "Public Welfare Medal": [
        ("instanceOf", "Award", False),
        ("awardedBy", "National Academy of Sciences", True),
    ],
    "Hoover Medal": [
        ("instanceOf", "Award", False),
        ("firstAwarded", "1930", False),
    ],
    "National Medal of Science": [
        ("instanceOf", "Award", False),
        ("country", "United States", True),
        ("firstAwarded", "1963", False),
    ],
    "National Academy of Sciences": [
        ("instanceOf", "Organization", False),
        ("country", "United States", True),
        ("foundedYear", "1863", False),
    ],
    "American Academy of Arts and Sciences": [
        ("instanceOf", "Organization", False),
        ("foundedYear", "1780", False),
    ],
    "Phoebe Clara Davis": [
        ("instanceOf", "Person", False),
        ("spouse", "Vannevar Bush", True),
    ],
    "Manhattan Project": [
        ("instanceOf", "Project", False),
        ("country", "United States", True),
        ("startedIn", "1942", False),
        ("endedIn", "1946", False),
    ],
    "Douglas Engelbart": [
        ("instanceOf", "Person", False),
        ("birthDate", "1925-01-30", False),
        ("knownFor", "Computer mouse", False),
    ],
    "Ted Nelson": [
        ("instanceOf", "Person", False),
        ("birthDate", "1937-06-17", False),
        ("knownFor", "Hypertext", False),
    ],
}

# third layer: a couple of richer records plus the deduplication pair
_DEMO_LAYER3: dict[str, list[tuple[str, str, bool]]] = {
    "Massachusetts": [
        ("instanceOf", "State", False),
        ("country", "United States", True),
        ("capital", "Boston", True),
    ],
    "Bell Labs": [
        ("instanceOf", "Company", False),
        ("locatedIn", "Murray Hill, New Jersey", True),
    ],
    "United States": [
        ("instanceOf", "Country", False),
        ("capital", "Washington, D.C.", True),
        ("president", "John F. Kennedy", True),
        ("formerPresident", "John Fitzgerald Kennedy", True),
    ],
    "John F. Kennedy": [
        ("instanceOf", "Person", False),
        ("birthDate", "1917-05-29", False),
        ("birthPlace", "Brookline, Massachusetts", True),
        ("deathDate", "1963-11-22", False),
        ("position", "President of the United States", False),
        ("spouse", "Jacqueline Kennedy", True),
        ("party", "Democratic Party", True),
        ("almaMater", "Harvard University", True),
        ("predecessor", "Dwight D. Eisenhower", True),
        ("successor", "Lyndon B. Johnson", True),
    ],
    "John Fitzgerald Kennedy": [
        ("instanceOf", "Person", False),
        ("birthDate", "1917-05-29", False),
        ("birthPlace", "Brookline, Massachusetts", True),
        ("deathDate", "1963-11-22", False),
        ("position", "35th President of the United States", False),
        ("branch", "United States Navy", True),
        ("spouse", "Jacqueline Kennedy", True),
        ("almaMater", "Harvard University", True),
    ],
}


def demo_world() -> ScriptedWorld:
    """The worked example for the demo script: a three-layer crawl seeded at
    Vannevar Bush, with relation-name variants, a duplicate entity pair,
    taxonomy guidance, and scripted evaluation services."""
    builder = WorldBuilder()
    builder.elicit("Vannevar Bush", [(p, o) for p, o, _ in VANNEVAR_TRIPLES])
    entity_phrases = {o for _, o, is_ent in VANNEVAR_TRIPLES if is_ent}

    for subject, rows in {**_DEMO_LAYER2, **_DEMO_LAYER3}.items():
        builder.elicit(subject, [(p, o) for p, o, _ in rows])
        entity_phrases.update(o for _, o, is_ent in rows if is_ent)
    builder.mark_entities(sorted(entity_phrases))

    builder.seed_taxonomy(node("Thing", node("Agent"), node("Place"), node("Work"), node("Event"), node("Object")))
    class_scores = {
        "Person": 3, "Organization": 3, "City": 4, "University": 5, "Company": 5,
        "Award": 4, "Essay": 6, "Report": 6, "Concept": 2, "Machine": 4,
        "Government agency": 5, "Project": 4, "Scientist": 6, "Engineer": 6,
        "State": 4, "Country": 3,
    }
    for cls, score in class_scores.items():
        builder.score(cls, score)
    for cls, branch in {
        "Person": "Agent", "Organization": "Agent", "City": "Place", "State": "Place",
        "Country": "Place", "Award": "Object", "Machine": "Object", "Concept": "Work",
        "Essay": "Work", "Report": "Work", "Project": "Event",
    }.items():
        builder.superclass(cls, "Thing", branch)
    builder.superclass("University", "Thing", "Agent")
    builder.superclass("University", "Agent", "Organization")
    builder.superclass("Company", "Thing", "Agent")
    builder.superclass("Company", "Agent", "Organization")
    builder.superclass("Government agency", "Thing", "Agent")
    builder.superclass("Government agency", "Agent", "Organization")
    builder.superclass("Scientist", "Thing", "Agent")
    builder.superclass("Scientist", "Agent", "Person")
    builder.superclass("Engineer", "Thing", "Agent")
    builder.superclass("Engineer", "Agent", "Person")

    for label in ("Vannevar Bush", "Claude Shannon", "Raytheon", "Memex"):
        builder.search(label, [{"title": label, "snippet": f"{label} is well documented.", "url": "https://e.org"}])
        builder.entity_verdict(label, "verifiable")
    builder.search("Phoebe Clara Davis", [])
    claim = "Vannevar Bush founded Raytheon"
    builder.search("Vannevar Bush Raytheon", [{"title": "Raytheon", "snippet": claim, "url": "https://e.org"}])
    builder.triple_verdict(claim, "entailed")
    for label in ("Vannevar Bush", "Claude Shannon", "Manhattan Project"):
        builder.refkb(label, "exact")
    builder.refkb("Memex", "fuzzy")

    return builder.build()
