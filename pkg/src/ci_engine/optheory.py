"""Operational theories: declared procedures and pluggable predictions.

An operational diagram is wired from the same learning, ignoring, and
embedded generators as the realist theory, plus procedure-knowledge
boxes: an inferential wire over a declared alphabet of named procedures
feeding the causal ports those procedures act on.  Systems may be
classical (enumerated carriers) or general (abstract labels with a
quantum dimension), but propositions and learning attach to classical
systems only.

A prediction map resolves procedure names to semantics, either exact
substochastic matrices (classical backend) or Kraus data over hybrid
classical/quantum registers (quantum backend), and evaluates causally
closed diagrams to a probability matrix over their inferential ports.
The quantum evaluation contracts vectorized superoperators: a quantum
wire of dimension d becomes an axis of size d*d, a classical wire an
axis of plain probabilities.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from . import fstheory, substoch
from .diagrams import (
    CAUSAL,
    Abstract,
    Box,
    Diagram,
    close_boundary,
    inferential_system,
)
from .errors import (
    CarrierMismatch,
    ConfigError,
    DimensionMismatch,
    NotCausallyClosed,
    NotPositive,
    SignatureMismatch,
    TypeMismatch,
    UnresolvedProcedure,
    ValidationError,
)
from .fstheory import (
    GenEmbedded,
    GenIgnore,
    GenPropGain,
    bundle_carrier,
    embedded,
    ignore,
    prop_gain,
    state_box,
)
from .tensornet import contract

_KRAUS_TOL = 1e-9
_EQUIV_TOL = 1e-9


def _is_classical(t):
    return t.classical and not isinstance(t.carrier, Abstract)


def _is_quantum(t):
    return isinstance(t.carrier, Abstract) and not t.classical


def _qdim(t):
    if not _is_quantum(t):
        raise TypeMismatch("not a quantum system")
    if not isinstance(t.carrier.dim, int) or t.carrier.dim < 1:
        raise TypeMismatch(
            f"quantum system {t.carrier.name!r} needs a positive dimension"
        )
    return t.carrier.dim


class QuantumProcess:
    """Kraus data for a hybrid classical/quantum procedure.

    ``kraus`` maps a pair (classical output labels, classical input
    labels) to the Kraus matrices of that classical branch; each matrix
    sends the product of the quantum input registers to the product of
    the quantum output registers, ports in declaration order.  Missing
    branches are zero.  Trace may decrease but never increase.
    """

    def __init__(self, kraus):
        table = {}
        for (c_out, c_in), mats in dict(kraus).items():
            key = (tuple(c_out), tuple(c_in))
            table[key] = tuple(np.asarray(m, dtype=complex) for m in mats)
        self.kraus = table


@dataclass(frozen=True)
class ProcedureDecl:
    """A named laboratory procedure with its signature and semantics."""

    name: str
    ins: tuple
    outs: tuple
    channel: object = field(compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "ins", tuple(self.ins))
        object.__setattr__(self, "outs", tuple(self.outs))
        if not self.name or not isinstance(self.name, str):
            raise ConfigError("procedures need nonempty string names")
        for t in self.ins + self.outs:
            if t.kind != CAUSAL:
                raise TypeMismatch("procedures act on causal systems")
        if isinstance(self.channel, substoch.SubstochMap):
            if not all(_is_classical(t) for t in self.ins + self.outs):
                raise TypeMismatch(
                    "matrix semantics fit classical signatures only"
                )
            if self.channel.dom != bundle_carrier(self.ins):
                raise CarrierMismatch(
                    f"procedure {self.name!r}: matrix domain does not match inputs"
                )
            if self.channel.cod != bundle_carrier(self.outs):
                raise CarrierMismatch(
                    f"procedure {self.name!r}: matrix codomain does not match outputs"
                )
        elif isinstance(self.channel, QuantumProcess):
            _validate_kraus(self)
        else:
            raise ConfigError(
                f"procedure {self.name!r} needs a SubstochMap or QuantumProcess"
            )


def _classical_ports(types):
    return [t for t in types if _is_classical(t)]


def _quantum_dims(types):
    return tuple(_qdim(t) for t in types if _is_quantum(t))


def _validate_kraus(decl):
    ch = decl.channel
    c_ins = _classical_ports(decl.ins)
    c_outs = _classical_ports(decl.outs)
    d_in = 1
    for d in _quantum_dims(decl.ins):
        d_in *= d
    d_out = 1
    for d in _quantum_dims(decl.outs):
        d_out *= d
    for (c_out, c_in), mats in ch.kraus.items():
        if len(c_out) != len(c_outs) or len(c_in) != len(c_ins):
            raise CarrierMismatch(
                f"procedure {decl.name!r}: classical label arity mismatch"
            )
        for lab, t in zip(c_out, c_outs):
            if lab not in t.carrier:
                raise CarrierMismatch(
                    f"procedure {decl.name!r}: label {lab!r} not in carrier"
                )
        for lab, t in zip(c_in, c_ins):
            if lab not in t.carrier:
                raise CarrierMismatch(
                    f"procedure {decl.name!r}: label {lab!r} not in carrier"
                )
        for m in mats:
            if m.shape != (d_out, d_in):
                raise DimensionMismatch(
                    f"procedure {decl.name!r}: Kraus shape {m.shape}, "
                    f"expected {(d_out, d_in)}"
                )
    for c_in in iproduct(*(t.carrier for t in c_ins)):
        total = np.zeros((d_in, d_in), dtype=complex)
        for (c_out, key_in), mats in ch.kraus.items():
            if key_in != c_in:
                continue
            for m in mats:
                total += m.conj().T @ m
        if not ch.kraus:
            continue
        top = max(np.linalg.eigvalsh((total + total.conj().T) / 2)) if d_in else 0.0
        if top > 1 + _KRAUS_TOL:
            raise ValidationError(
                f"procedure {decl.name!r} increases trace by {top - 1:.3g}"
            )
    return decl


@dataclass(frozen=True)
class OpKnowledge:
    """Payload of a procedure-knowledge box: signature plus alphabet."""

    in_systems: tuple
    out_systems: tuple
    alphabet: tuple


@dataclass(frozen=True)
class OpProc:
    """Payload of a box that is one fixed named procedure."""

    name: str


@dataclass
class PredictionMap:
    """Resolution of procedure names to semantics, with one backend.

    All channels are exact matrices (classical backend) or all Kraus
    data (quantum backend); mixing the two is rejected.
    """

    decls: tuple

    def __post_init__(self):
        self.decls = tuple(self.decls)
        by_name = {}
        for decl in self.decls:
            if decl.name in by_name:
                raise ConfigError(f"duplicate procedure name {decl.name!r}")
            by_name[decl.name] = decl
        self._by_name = by_name
        kinds = {type(d.channel) for d in self.decls}
        if kinds <= {substoch.SubstochMap}:
            self.backend = "classical"
        elif kinds == {QuantumProcess}:
            self.backend = "quantum"
        else:
            raise ConfigError("a prediction map uses one backend throughout")

    def decl(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise UnresolvedProcedure(f"no procedure named {name!r}") from None

    def alphabet(self, in_systems, out_systems):
        in_systems = tuple(in_systems)
        out_systems = tuple(out_systems)
        return tuple(
            d.name
            for d in self.decls
            if d.ins == in_systems and d.outs == out_systems
        )


def op_knowledge_box(pm, in_systems=(), out_systems=(), name="do"):
    """Knowledge over the declared procedures with this signature.

    The box's first input is an inferential wire whose carrier is the
    procedure alphabet; the rest are the causal inputs.
    """
    in_systems = tuple(in_systems)
    out_systems = tuple(out_systems)
    alphabet = pm.alphabet(in_systems, out_systems)
    if not alphabet:
        raise UnresolvedProcedure(
            "no declared procedures match the requested signature"
        )
    h = inferential_system(alphabet)
    return Box(
        name,
        (h,) + in_systems,
        out_systems,
        OpKnowledge(in_systems, out_systems, alphabet),
    )


def procedure_box(pm, name, box_name=None):
    """One fixed procedure as a box, no inferential port.

    Equivalent to a knowledge box fed with point knowledge at ``name``,
    which is how it is resolved during prediction.
    """
    decl = pm.decl(name)
    return Box(box_name or name, decl.ins, decl.outs, OpProc(name))


def procedure_diagram(pm, name):
    """A single known procedure: point knowledge applied to its box."""
    decl = pm.decl(name)
    kb = op_knowledge_box(pm, decl.ins, decl.outs)
    pt = state_box(
        substoch.point_state(kb.ins[0].carrier, name), name=f"[{name}]"
    )
    wires = [(("box", 0, 0), ("box", 1, 0))]
    wires += [(("in", i), ("box", 1, i + 1)) for i in range(len(decl.ins))]
    wires += [(("box", 1, j), ("out", j)) for j in range(len(decl.outs))]
    return Diagram((pt, kb), tuple(wires), decl.ins, decl.outs)


# ---------------------------------------------------------------------------
# Prediction


def _check_closed(d):
    if any(t.kind == CAUSAL for t in d.input_types + d.output_types):
        raise NotCausallyClosed("prediction needs all causal ports closed")


def _resolve_boxes(d, pm):
    for box in d.boxes:
        p = box.payload
        if isinstance(p, OpKnowledge):
            for nm in p.alphabet:
                decl = pm.decl(nm)
                if decl.ins != p.in_systems or decl.outs != p.out_systems:
                    raise UnresolvedProcedure(
                        f"procedure {nm!r} was declared with another signature"
                    )
        elif isinstance(p, OpProc):
            decl = pm.decl(p.name)
            if decl.ins != box.ins or decl.outs != box.outs:
                raise UnresolvedProcedure(
                    f"procedure {p.name!r} was declared with another signature"
                )
        elif not isinstance(p, (GenPropGain, GenIgnore, GenEmbedded)):
            raise TypeMismatch(f"box {box.name!r} has no operational semantics")


def _classical_tensor(pm):
    def tensor(box):
        p = box.payload
        if isinstance(p, OpKnowledge):
            out_sizes = tuple(t.size for t in p.out_systems)
            in_sizes = tuple(t.size for t in p.in_systems)
            arr = np.zeros(out_sizes + (len(p.alphabet),) + in_sizes, dtype=object)
            for k, nm in enumerate(p.alphabet):
                ch = pm.decl(nm).channel
                grid = np.empty((len(ch.cod), len(ch.dom)), dtype=object)
                for r in range(len(ch.cod)):
                    for c in range(len(ch.dom)):
                        grid[r, c] = ch.entries[r][c]
                idx = (
                    (slice(None),) * len(out_sizes)
                    + (k,)
                    + (slice(None),) * len(in_sizes)
                )
                arr[idx] = grid.reshape(out_sizes + in_sizes)
            return arr
        if isinstance(p, OpProc):
            ch = pm.decl(p.name).channel
            out_sizes = tuple(t.size for t in box.outs)
            in_sizes = tuple(t.size for t in box.ins)
            grid = np.empty((len(ch.cod), len(ch.dom)), dtype=object)
            for r in range(len(ch.cod)):
                for c in range(len(ch.dom)):
                    grid[r, c] = ch.entries[r][c]
            return grid.reshape(out_sizes + in_sizes)
        return fstheory.generator_tensor(box)

    return tensor


def _vec_axes(block, out_dims, in_dims):
    """(Do,Do,Di,Di) superoperator block to per-register d*d axes."""
    shape = tuple(out_dims) * 2 + tuple(in_dims) * 2
    t = block.reshape(shape)
    p, q = len(out_dims), len(in_dims)
    perm = []
    for a in range(p):
        perm += [a, a + p]
    for b in range(q):
        perm += [2 * p + b, 2 * p + q + b]
    t = t.transpose(perm)
    return t.reshape(tuple(d * d for d in out_dims) + tuple(d * d for d in in_dims))


def _port_axis(t):
    return t.size if _is_classical(t) else _qdim(t) ** 2


def _proc_tensor(decl):
    """One procedure as a hybrid superoperator tensor, outputs first."""
    ch = decl.channel
    out_axes = tuple(_port_axis(t) for t in decl.outs)
    in_axes = tuple(_port_axis(t) for t in decl.ins)
    q_out = _quantum_dims(decl.outs)
    q_in = _quantum_dims(decl.ins)
    d_out = int(np.prod(q_out)) if q_out else 1
    d_in = int(np.prod(q_in)) if q_in else 1
    arr = np.zeros(out_axes + in_axes, dtype=complex)
    for (c_out, c_in), mats in ch.kraus.items():
        block = np.zeros((d_out, d_out, d_in, d_in), dtype=complex)
        for m in mats:
            block += np.einsum("im,jn->ijmn", m, m.conj())
        vecd = _vec_axes(block, q_out, q_in)
        idx = []
        ci = iter(c_out)
        for t in decl.outs:
            idx.append(t.carrier.index(next(ci)) if _is_classical(t) else slice(None))
        ci = iter(c_in)
        for t in decl.ins:
            idx.append(t.carrier.index(next(ci)) if _is_classical(t) else slice(None))
        arr[tuple(idx)] = vecd
    return arr


def _quantum_tensor(pm):
    def tensor(box):
        p = box.payload
        if isinstance(p, OpKnowledge):
            out_axes = tuple(_port_axis(t) for t in p.out_systems)
            in_axes = tuple(_port_axis(t) for t in p.in_systems)
            arr = np.zeros(out_axes + (len(p.alphabet),) + in_axes, dtype=complex)
            for k, nm in enumerate(p.alphabet):
                idx = (
                    (slice(None),) * len(out_axes)
                    + (k,)
                    + (slice(None),) * len(in_axes)
                )
                arr[idx] = _proc_tensor(pm.decl(nm))
            return arr
        if isinstance(p, OpProc):
            return _proc_tensor(pm.decl(p.name))
        if isinstance(p, GenPropGain):
            n = p.system.size
            arr = np.zeros((n, n, n), dtype=complex)
            for x in range(n):
                arr[x, x, x] = 1.0
            return arr
        if isinstance(p, GenIgnore):
            if _is_quantum(p.system):
                d = _qdim(p.system)
                return np.eye(d, dtype=complex).reshape(d * d)
            return np.ones(p.system.size, dtype=complex)
        if isinstance(p, GenEmbedded):
            s = p.matrix
            out_sizes = tuple(t.size for t in box.outs)
            in_sizes = tuple(t.size for t in box.ins)
            grid = np.array(
                [[complex(v) for v in row] for row in s.entries], dtype=complex
            )
            return grid.reshape(out_sizes + in_sizes)
        raise TypeMismatch(f"box {box.name!r} has no operational semantics")

    return tensor


def _wire_size(t):
    if isinstance(t.carrier, Abstract):
        return _qdim(t) ** 2
    return t.size


def _substoch_from_floats(dom, cod, grid):
    """Dyadic rationalization of a float probability grid, 1e-9 slack."""
    cols = []
    for c in range(len(dom)):
        col = []
        for r in range(len(cod)):
            v = grid[r][c]
            if abs(v.imag if isinstance(v, complex) else 0.0) > _EQUIV_TOL:
                raise ValidationError(f"non-real probability {v!r}")
            x = v.real if isinstance(v, complex) else float(v)
            if x < -_EQUIV_TOL or x > 1 + _EQUIV_TOL:
                raise ValidationError(f"probability {x} outside [0, 1]")
            col.append(Fraction(min(max(x, 0.0), 1.0)))
        total = sum(col)
        if total > 1 + Fraction(1, 10**9):
            raise ValidationError(f"column {c} sums to {float(total)} > 1")
        if total > 1:
            col = [v / total for v in col]
        cols.append(col)
    rows = tuple(
        tuple(cols[c][r] for c in range(len(dom))) for r in range(len(cod))
    )
    return substoch.SubstochMap(dom, cod, rows)


def predict_closed(d, pm):
    """Probability matrix of a causally closed diagram over its records.

    Classical backend: exact contraction.  Quantum backend: vectorized
    superoperator contraction, probabilities read on classical wires.
    """
    _check_closed(d)
    _resolve_boxes(d, pm)
    if pm.backend == "classical":
        for box in d.boxes:
            for t in box.ins + box.outs:
                if not _is_classical(t):
                    raise TypeMismatch(
                        "classical backend met a nonclassical wire"
                    )
        return fstheory._bundled_matrix(d, _classical_tensor(pm))
    arr = contract(
        d,
        _quantum_tensor(pm),
        _wire_size,
        eye=lambda n: np.eye(n, dtype=complex),
    )
    cod = bundle_carrier(d.output_types)
    dom = bundle_carrier(d.input_types)
    grid = np.asarray(arr, dtype=complex).reshape(len(cod), len(dom))
    return _substoch_from_floats(dom, cod, grid)


def op_equivalent(d1, d2, pm):
    """Equality of predictions: exact classically, 1e-9 on quantum."""
    if d1.input_types != d2.input_types or d1.output_types != d2.output_types:
        raise SignatureMismatch("equivalence compares equal boundary signatures")
    p1, p2 = predict_closed(d1, pm), predict_closed(d2, pm)
    if pm.backend == "classical":
        return p1 == p2
    gap = max(
        (
            abs(p1.entries[r][c] - p2.entries[r][c])
            for r in range(len(p1.cod))
            for c in range(len(p1.dom))
        ),
        default=Fraction(0),
    )
    return float(gap) <= _EQUIV_TOL


def _unfold(label, k):
    if k == 0:
        return ()
    parts = []
    for _ in range(k - 1):
        label, last = label
        parts.append(last)
    parts.append(label)
    return tuple(reversed(parts))


@dataclass(frozen=True)
class PointAtomicTable:
    """Probabilities at point-distribution inputs and atomic outputs."""

    dom: tuple
    cod: tuple
    probs: tuple


def point_atomic_table(d, pm):
    """Probe the diagram entry by entry with points and atoms.

    Every open inferential input is fed a point distribution and every
    open inferential output is asked an atomic proposition; each closed
    probe is evaluated independently.
    """
    _check_closed(d)
    dom = bundle_carrier(d.input_types)
    cod = bundle_carrier(d.output_types)
    rows = []
    for y in cod:
        y_parts = _unfold(y, len(d.output_types))
        sinks = tuple(
            fstheory.effect_box(
                substoch.proposition(t.carrier, (part,)), name="atom"
            )
            for t, part in zip(d.output_types, y_parts)
        )
        row = []
        for x in dom:
            x_parts = _unfold(x, len(d.input_types))
            sources = tuple(
                state_box(substoch.point_state(t.carrier, part), name="point")
                for t, part in zip(d.input_types, x_parts)
            )
            closed = close_boundary(d, sources, sinks)
            row.append(predict_closed(closed, pm).entries[0][0])
        rows.append(tuple(row))
    return PointAtomicTable(dom, cod, tuple(rows))


def reconstruct(table):
    """Reassemble the full prediction matrix from a point/atomic table.

    Exact probes stay exact; float probes go through the usual dyadic
    rationalization.
    """
    if all(
        isinstance(v, (Fraction, int)) for row in table.probs for v in row
    ):
        cols = []
        for c in range(len(table.dom)):
            col = [Fraction(row[c]) for row in table.probs]
            total = sum(col)
            if total > 1 + Fraction(1, 10**9):
                raise ValidationError(
                    f"probe column {c} sums to {float(total)} > 1"
                )
            if total > 1:
                col = [v / total for v in col]
            cols.append(col)
        rows = tuple(
            tuple(cols[c][r] for c in range(len(table.dom)))
            for r in range(len(table.cod))
        )
        return substoch.SubstochMap(table.dom, table.cod, rows)
    return _substoch_from_floats(
        table.dom,
        table.cod,
        tuple(tuple(v for v in row) for row in table.probs),
    )


def quotient_representative(d, pm):
    """The canonical member of the diagram's equivalence class."""
    return predict_closed(d, pm)


# ---------------------------------------------------------------------------
# Quantum matrix primitives


def _as_density(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch("density matrices are square")
    return rho


def kraus_apply(rho, kraus):
    """Apply a Kraus family to a density matrix."""
    rho = _as_density(rho)
    out = None
    for m in kraus:
        m = np.asarray(m, dtype=complex)
        if m.shape[1] != rho.shape[0]:
            raise DimensionMismatch("Kraus operator does not fit the state")
        term = m @ rho @ m.conj().T
        out = term if out is None else out + term
    if out is None:
        raise DimensionMismatch("at least one Kraus operator is required")
    return out


def tensor(rho, sigma):
    """Kronecker product of two density matrices."""
    return np.kron(_as_density(rho), _as_density(sigma))


def partial_trace(rho, dims, keep):
    """Trace out all registers except ``keep`` from a product register."""
    rho = _as_density(rho)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionMismatch("register dimensions do not factor the state")
    if not (0 <= keep < len(dims)):
        raise DimensionMismatch("keep index out of range")
    t = rho.reshape(dims + dims)
    n = len(dims)
    for axis in reversed([k for k in range(n) if k != keep]):
        t = np.trace(t, axis1=axis, axis2=axis + (t.ndim // 2))
    return t


def born(rho, effect):
    """Probability of an effect on a state: the real trace pairing."""
    rho = _as_density(rho)
    effect = np.asarray(effect, dtype=complex)
    if effect.shape != rho.shape:
        raise DimensionMismatch("effect and state dimensions differ")
    eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if eig.min() < -1e-9:
        raise NotPositive(f"state has eigenvalue {eig.min():.3g}")
    value = np.trace(rho @ effect)
    if abs(value.imag) > _EQUIV_TOL:
        raise ValidationError("Born pairing came out non-real")
    return float(value.real)
