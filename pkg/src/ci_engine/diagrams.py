"""String diagrams over typed systems.

A diagram is a finite set of boxes wired together, with an ordered open
boundary on each side.  Only connectivity and the boundary order carry
meaning: identities and swaps are wiring rather than boxes, and a scalar
is a diagram whose boundary is empty on both sides.

Wire endpoints are small tuples.  Producers are either a boundary input
``("in", k)`` or a box output ``("box", b, j)``; consumers are either a
boundary output ``("out", k)`` or a box input ``("box", b, i)``.  Every
producer feeds exactly one consumer and vice versa, so a bare identity
wire is ``("in", 0) -> ("out", 0)`` with no boxes at all.
"""

from dataclasses import dataclass, field

from .caps import enumeration_cap
from .errors import (
    CapExceeded,
    CycleDetected,
    DanglingPort,
    SignatureMismatch,
    TypeMismatch,
)

CAUSAL = "causal"
INFERENTIAL = "inferential"

STAR = ("*",)


@dataclass(frozen=True)
class Abstract:
    """Carrier placeholder for systems without an enumerated label set."""

    name: str
    dim: int | None = None


@dataclass(frozen=True)
class SystemType:
    """A system: causal or inferential, with a carrier and a classical flag."""

    kind: str
    carrier: tuple | Abstract
    classical: bool = True

    def __post_init__(self):
        if self.kind not in (CAUSAL, INFERENTIAL):
            raise TypeMismatch(f"unknown system kind {self.kind!r}")
        if isinstance(self.carrier, Abstract):
            if self.classical:
                raise TypeMismatch("an abstract carrier cannot be classical")
        else:
            object.__setattr__(self, "carrier", tuple(self.carrier))
            if len(set(self.carrier)) != len(self.carrier):
                raise TypeMismatch("carrier labels must be distinct")
            if not self.classical and self.kind == INFERENTIAL:
                raise TypeMismatch("inferential systems are classical")

    @property
    def size(self):
        if isinstance(self.carrier, Abstract):
            raise TypeMismatch(
                f"abstract system {self.carrier.name!r} has no enumerated carrier"
            )
        return len(self.carrier)

    def position(self, label):
        try:
            return self.carrier.index(label)
        except (ValueError, AttributeError):
            raise TypeMismatch(f"label {label!r} not in carrier") from None


def causal_system(carrier, classical=True):
    return SystemType(CAUSAL, carrier, classical)


def inferential_system(carrier):
    return SystemType(INFERENTIAL, carrier, True)


def quantum_system(name, dim):
    return SystemType(CAUSAL, Abstract(name, dim), False)


def product_carrier(left, right):
    """Row-major pairing: (x, y) runs with x outermost."""
    size = len(left) * len(right)
    if size > enumeration_cap():
        raise CapExceeded(f"product carrier of size {size} exceeds the cap")
    return tuple((x, y) for x in left for y in right)


@dataclass(frozen=True)
class Box:
    """A named process with ordered input and output ports.

    Identity for diagram equality is the declared name plus signature;
    the payload carries semantics for evaluation and is ignored here.
    """

    name: str
    ins: tuple
    outs: tuple
    payload: object = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))
        object.__setattr__(self, "outs", tuple(self.outs))


def _endpoint_ok(end, side):
    return (
        isinstance(end, tuple)
        and len(end) in (2, 3)
        and end[0] in ({"in", "box"} if side == "src" else {"out", "box"})
    )


@dataclass(frozen=True)
class Diagram:
    """An immutable, validated wiring of boxes with an ordered boundary."""

    boxes: tuple
    wires: tuple
    input_types: tuple
    output_types: tuple

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "wires", tuple(tuple(w) for w in self.wires))
        object.__setattr__(self, "input_types", tuple(self.input_types))
        object.__setattr__(self, "output_types", tuple(self.output_types))
        _validate(self)

    # Convenience views of the boundary as ordered open ports.
    @property
    def open_inputs(self):
        return tuple(("in", k) for k in range(len(self.input_types)))

    @property
    def open_outputs(self):
        return tuple(("out", k) for k in range(len(self.output_types)))


def _producer_type(d, src):
    if src[0] == "in":
        return d.input_types[src[1]]
    return d.boxes[src[1]].outs[src[2]]


def _consumer_type(d, dst):
    if dst[0] == "out":
        return d.output_types[dst[1]]
    return d.boxes[dst[1]].ins[dst[2]]


def _validate(d):
    n = len(d.boxes)
    producers = {}
    consumers = {}
    for src, dst in d.wires:
        if not _endpoint_ok(src, "src") or not _endpoint_ok(dst, "dst"):
            raise DanglingPort(f"malformed wire endpoint in {(src, dst)!r}")
        for end, side in ((src, "src"), (dst, "dst")):
            if end[0] == "box":
                if not (0 <= end[1] < n):
                    raise DanglingPort(f"wire references missing box {end[1]}")
                ports = d.boxes[end[1]].outs if side == "src" else d.boxes[end[1]].ins
                if not (0 <= end[2] < len(ports)):
                    raise DanglingPort(f"wire references missing port {end!r}")
            else:
                bound = d.input_types if end[0] == "in" else d.output_types
                if not (0 <= end[1] < len(bound)):
                    raise DanglingPort(f"wire references missing boundary {end!r}")
        if src in producers:
            raise DanglingPort(f"producer {src!r} wired twice")
        if dst in consumers:
            raise DanglingPort(f"consumer {dst!r} wired twice")
        producers[src] = dst
        consumers[dst] = src
        if _producer_type(d, src) != _consumer_type(d, dst):
            raise TypeMismatch(f"wire {src!r} -> {dst!r} joins different types")
    for k in range(len(d.input_types)):
        if ("in", k) not in producers:
            raise DanglingPort(f"boundary input {k} is unused")
    for k in range(len(d.output_types)):
        if ("out", k) not in consumers:
            raise DanglingPort(f"boundary output {k} is unfed")
    for b, box in enumerate(d.boxes):
        for j in range(len(box.outs)):
            if ("box", b, j) not in producers:
                raise DanglingPort(f"output port {j} of box {b} is unused")
        for i in range(len(box.ins)):
            if ("box", b, i) not in consumers:
                raise DanglingPort(f"input port {i} of box {b} is unfed")
    _check_acyclic(d)


def _check_acyclic(d):
    n = len(d.boxes)
    succ = [set() for _ in range(n)]
    indeg = [0] * n
    for src, dst in d.wires:
        if src[0] == "box" and dst[0] == "box" and dst[1] not in succ[src[1]]:
            succ[src[1]].add(dst[1])
            indeg[dst[1]] += 1
    ready = [b for b in range(n) if indeg[b] == 0]
    seen = 0
    while ready:
        b = ready.pop()
        seen += 1
        for s in succ[b]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if seen != n:
        raise CycleDetected("diagram wiring contains a directed cycle")


def build(boxes, wires, input_types, output_types):
    """Validated constructor; raises TypeMismatch, CycleDetected, DanglingPort."""
    return Diagram(tuple(boxes), tuple(wires), tuple(input_types), tuple(output_types))


def identity(types):
    types = tuple(types)
    wires = tuple((("in", k), ("out", k)) for k in range(len(types)))
    return Diagram((), wires, types, types)


def permutation(types, perm):
    """Wiring that sends input ``perm[j]`` to output ``j``."""
    types = tuple(types)
    if sorted(perm) != list(range(len(types))):
        raise TypeMismatch("perm must be a permutation of the inputs")
    out_types = tuple(types[p] for p in perm)
    wires = tuple((("in", p), ("out", j)) for j, p in enumerate(perm))
    return Diagram((), wires, types, out_types)


def swap(a, b):
    return permutation((a, b), (1, 0))


def from_box(box):
    """The diagram consisting of a single box with its ports on the boundary."""
    wires = [(("in", i), ("box", 0, i)) for i in range(len(box.ins))]
    wires += [(("box", 0, j), ("out", j)) for j in range(len(box.outs))]
    return Diagram((box,), tuple(wires), box.ins, box.outs)


def _shift_end(end, box_shift, in_shift=0, out_shift=0):
    if end[0] == "box":
        return ("box", end[1] + box_shift, end[2])
    if end[0] == "in":
        return ("in", end[1] + in_shift)
    return ("out", end[1] + out_shift)


def compose_sequential(first, second):
    """Feed the outputs of ``first`` into the inputs of ``second``."""
    if first.output_types != second.input_types:
        raise TypeMismatch(
            "sequential composition joins "
            f"{len(first.output_types)} outputs to {len(second.input_types)} "
            "inputs of different types"
        )
    shift = len(first.boxes)
    produced = {}
    kept = []
    for src, dst in first.wires:
        if dst[0] == "out":
            produced[dst[1]] = src
        else:
            kept.append((src, dst))
    consumed = {}
    for src, dst in second.wires:
        src2 = _shift_end(src, shift)
        dst2 = _shift_end(dst, shift)
        if src[0] == "in":
            consumed[src[1]] = dst2
        else:
            kept.append((src2, dst2))
    for k, src in produced.items():
        kept.append((src, consumed[k]))
    return Diagram(
        first.boxes + second.boxes,
        tuple(kept),
        first.input_types,
        second.output_types,
    )


def compose_parallel(left, right):
    """Place two diagrams side by side; boundaries concatenate in order."""
    shift = len(left.boxes)
    in_shift = len(left.input_types)
    out_shift = len(left.output_types)
    wires = list(left.wires)
    for src, dst in right.wires:
        wires.append(
            (
                _shift_end(src, shift, in_shift, out_shift),
                _shift_end(dst, shift, in_shift, out_shift),
            )
        )
    return Diagram(
        left.boxes + right.boxes,
        tuple(wires),
        left.input_types + right.input_types,
        left.output_types + right.output_types,
    )


def close_boundary(d, sources, sinks):
    """Cap every boundary port: sources feed inputs, sinks eat outputs.

    Each source is a box with no inputs and one output of the matching
    boundary type; sinks mirror that on the other side.  The result has
    an empty boundary.
    """
    sources = tuple(sources)
    sinks = tuple(sinks)
    if len(sources) != len(d.input_types) or len(sinks) != len(d.output_types):
        raise SignatureMismatch("one source per input and one sink per output")
    boxes = list(d.boxes)
    src_idx = []
    for k, box in enumerate(sources):
        if box.ins != () or box.outs != (d.input_types[k],):
            raise SignatureMismatch(f"source {k} does not produce the boundary type")
        boxes.append(box)
        src_idx.append(len(boxes) - 1)
    sink_idx = []
    for k, box in enumerate(sinks):
        if box.outs != () or box.ins != (d.output_types[k],):
            raise SignatureMismatch(f"sink {k} does not consume the boundary type")
        boxes.append(box)
        sink_idx.append(len(boxes) - 1)
    wires = []
    for src, dst in d.wires:
        if src[0] == "in":
            src = ("box", src_idx[src[1]], 0)
        if dst[0] == "out":
            dst = ("box", sink_idx[dst[1]], 0)
        wires.append((src, dst))
    return Diagram(tuple(boxes), tuple(wires), (), ())


# ---------------------------------------------------------------------------
# Canonical serialization and equality


def _type_key(t):
    if isinstance(t.carrier, Abstract):
        carrier = f"abstract:{t.carrier.name}:{t.carrier.dim}"
    else:
        carrier = repr(t.carrier)
    return f"{t.kind}|{int(t.classical)}|{carrier}"


def _signature_key(box):
    ins = ",".join(_type_key(t) for t in box.ins)
    outs = ",".join(_type_key(t) for t in box.outs)
    return f"{box.name}[{ins}=>{outs}]"


def _neighbour_tables(d):
    n = len(d.boxes)
    incoming = [[] for _ in range(n)]
    outgoing = [[] for _ in range(n)]
    for src, dst in d.wires:
        if dst[0] == "box":
            incoming[dst[1]].append((dst[2], src))
        if src[0] == "box":
            outgoing[src[1]].append((src[2], dst))
    for rows in (incoming, outgoing):
        for row in rows:
            row.sort()
    return incoming, outgoing


def _refine_colors(d):
    """Stable partition of boxes by name, signature, and wiring context."""
    n = len(d.boxes)
    incoming, outgoing = _neighbour_tables(d)
    colors = [_signature_key(box) for box in d.boxes]
    for _ in range(n):
        keys = []
        for b in range(n):
            inc = tuple(
                (port, src[0], src[1] if src[0] == "in" else colors[src[1]], src[-1])
                for port, src in incoming[b]
            )
            out = tuple(
                (port, dst[0], dst[1] if dst[0] == "out" else colors[dst[1]], dst[-1])
                for port, dst in outgoing[b]
            )
            keys.append((colors[b], inc, out))
        ranking = {key: i for i, key in enumerate(sorted(set(keys)))}
        new = [f"c{ranking[key]}" for key in keys]
        if new == colors:
            break
        colors = new
    return colors


_ORDERING_BRANCH_CAP = 2000


def _canonical_order(d):
    """Topological order with deterministic tie-breaking.

    Boxes become ready once every box feeding them is placed.  Ready boxes
    are keyed by refined color plus their placed-predecessor references;
    exact ties are resolved by trying each candidate and keeping the
    lexicographically least serialization, with a hard cap on branching.
    """
    n = len(d.boxes)
    colors = _refine_colors(d)
    incoming, _ = _neighbour_tables(d)
    preds = [set() for _ in range(n)]
    for b in range(n):
        for _, src in incoming[b]:
            if src[0] == "box":
                preds[b].add(src[1])

    budget = [_ORDERING_BRANCH_CAP]

    def candidate_key(b, placed_ids):
        refs = []
        for port, src in incoming[b]:
            if src[0] == "in":
                refs.append((port, "in", src[1], 0))
            else:
                refs.append((port, "box", placed_ids[src[1]], src[2]))
        return (colors[b], tuple(refs))

    best = [None]

    def search(order, placed_ids):
        if len(order) == n:
            ser = _serialize_with_order(d, order)
            if best[0] is None or ser < best[0][0]:
                best[0] = (ser, list(order))
            return
        ready = [
            b
            for b in range(n)
            if b not in placed_ids and preds[b] <= placed_ids.keys()
        ]
        keyed = sorted((candidate_key(b, placed_ids), b) for b in ready)
        least = keyed[0][0]
        ties = [b for key, b in keyed if key == least]
        for b in ties:
            budget[0] -= 1
            if budget[0] < 0:
                raise CapExceeded("canonical ordering exceeded its branch cap")
            placed_ids[b] = len(order)
            order.append(b)
            search(order, placed_ids)
            order.pop()
            del placed_ids[b]
            if len(ties) == 1:
                return

    if n == 0:
        return []
    search([], {})
    return best[0][1]


def _serialize_with_order(d, order):
    canon = {b: i for i, b in enumerate(order)}

    def ref(end):
        if end[0] == "box":
            return ("box", canon[end[1]], end[2])
        return end

    lines = [
        "inputs " + ";".join(_type_key(t) for t in d.input_types),
        "outputs " + ";".join(_type_key(t) for t in d.output_types),
    ]
    for i, b in enumerate(order):
        lines.append(f"box {i} {_signature_key(d.boxes[b])}")
    wire_rows = sorted((ref(src), ref(dst)) for src, dst in d.wires)
    for src, dst in wire_rows:
        lines.append(f"wire {src!r} -> {dst!r}")
    return "\n".join(lines)


def canonical_serialization(d):
    """Deterministic bytes; equal exactly for equal diagrams."""
    if len(d.boxes) == 0:
        return _serialize_with_order(d, []).encode("utf-8")
    return _serialize_with_order(d, _canonical_order(d)).encode("utf-8")


def diagrams_equal(a, b):
    """Connectivity equality with ordered boundaries.

    Raises SignatureMismatch when the boundaries themselves differ, since
    comparing across signatures is a category error rather than inequality.
    """
    if a.input_types != b.input_types or a.output_types != b.output_types:
        raise SignatureMismatch("diagrams have different boundary signatures")
    return canonical_serialization(a) == canonical_serialization(b)


# ---------------------------------------------------------------------------
# Clamps


@dataclass(frozen=True)
class Clamp:
    """A diagram context with a hole.

    ``x`` prepares the hole's inputs together with auxiliary systems, and
    ``y`` consumes the hole's outputs together with the same auxiliaries,
    so inserting ``t`` computes ``y . (t (x) id_aux) . x``.
    """

    x: Diagram
    y: Diagram
    hole_inputs: tuple
    hole_outputs: tuple

    def __post_init__(self):
        object.__setattr__(self, "hole_inputs", tuple(self.hole_inputs))
        object.__setattr__(self, "hole_outputs", tuple(self.hole_outputs))
        hi = self.hole_inputs
        ho = self.hole_outputs
        if self.x.output_types[: len(hi)] != hi:
            raise SignatureMismatch("clamp x does not produce the hole inputs")
        aux = self.x.output_types[len(hi):]
        if self.y.input_types != ho + aux:
            raise SignatureMismatch(
                "clamp y must consume the hole outputs then the auxiliaries"
            )

    @property
    def aux_types(self):
        return self.x.output_types[len(self.hole_inputs):]


def insert_into_clamp(clamp, inner):
    """Plug ``inner`` into the clamp's hole."""
    if (
        inner.input_types != clamp.hole_inputs
        or inner.output_types != clamp.hole_outputs
    ):
        raise SignatureMismatch("inserted diagram does not match the hole")
    middle = compose_parallel(inner, identity(clamp.aux_types))
    return compose_sequential(compose_sequential(clamp.x, middle), clamp.y)
