import logging
import re
from collections.abc import Iterable

from topofabric.exceptions import InputError
from topofabric.models.scene import Atom, OntologyRule, SceneState

logger = logging.getLogger(__name__)

_ATOM = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*\(\s*([^()]*?)\s*\)\s*$")


def parse_atom(text: str) -> Atom:
    match = _ATOM.match(text)
    if match is None:
        raise InputError(f"cannot parse atom {text!r}")
    args = tuple(arg.strip() for arg in match.group(2).split(","))
    if not all(args):
        raise InputError(f"atom {text!r} has an empty argument")
    return Atom(predicate=match.group(1), args=args)


def parse_rule(text: str) -> OntologyRule:
    """
    Parse ``"Table(x) & On(y,x) & Book(y) -> CandidateForPickUp(y)"``.

    Raises:
        InputError: On malformed syntax or a rule that is not range-restricted.
    """
    if text.count("->") != 1:
        raise InputError(f"rule {text!r} must contain exactly one '->'")
    body_text, head_text = text.split("->")
    body = [parse_atom(part) for part in body_text.split("&")]
    try:
        return OntologyRule(body=body, head=parse_atom(head_text))
    except ValueError as e:
        raise InputError(f"invalid rule {text!r}: {e}") from e


def _matches(body: list[Atom], facts: set[Atom], binding: dict[str, str]):
    if not body:
        yield binding
        return
    first, rest = body[0], body[1:]
    for fact in facts:
        if fact.predicate != first.predicate or len(fact.args) != len(first.args):
            continue
        extended = dict(binding)
        for var, value in zip(first.args, fact.args, strict=True):
            if extended.setdefault(var, value) != value:
                break
        else:
            yield from _matches(rest, facts, extended)


def forward_chain(facts: Iterable[Atom], rules: list[OntologyRule]) -> list[Atom]:
    """Derive every new unary fact reachable from ``facts``; result sorted by (predicate, args)."""
    known = set(facts)
    derived: set[Atom] = set()
    rounds = 0
    while True:
        rounds += 1
        fresh = set()
        for rule in rules:
            for binding in _matches(rule.body, known, {}):
                atom = Atom(predicate=rule.head.predicate, args=(binding[rule.head.args[0]],))
                if atom not in known:
                    fresh.add(atom)
        if not fresh:
            break
        known |= fresh
        derived |= fresh
    logger.debug(f"forward chaining reached a fixpoint after {rounds} rounds")
    return sorted(derived, key=lambda atom: (atom.predicate, atom.args))


def scene_facts(
    scene: SceneState, relations: dict[str, list[tuple]] | None = None
) -> set[Atom]:
    """Unary label facts for each vertex plus binary relation facts, entities named by vertex id."""
    facts = {
        Atom(predicate=label, args=(str(v),))
        for v, label in zip(scene.graph.vertices, scene.labels, strict=True)
    }
    merged = {**scene.relations, **(relations or {})}
    for name, pairs in merged.items():
        facts.update(Atom(predicate=name, args=(str(a), str(b))) for a, b in pairs)
    return facts


def apply_ontology_rules(
    scene: SceneState,
    relations: dict[str, list[tuple]] | None,
    rules: list[OntologyRule],
) -> list[Atom]:
    return forward_chain(scene_facts(scene, relations), rules)
