"""Generic tensor contraction for diagram evaluation.

Each wire of a diagram becomes a tensor index and each box becomes a
tensor whose axes follow the box's ports, outputs first then inputs.
Contracting the network yields a single tensor with one axis per open
boundary port, outputs first then inputs, each side in boundary order.

The contraction is dtype-agnostic: exact semantics pass object arrays of
Fractions, the quantum backend passes complex arrays.  Wires that run
straight from a boundary input to a boundary output are materialized as
identity tensors so that the result always has the full set of boundary
axes.
"""

import itertools

import numpy as np

from .caps import enumeration_cap
from .errors import CapExceeded, DimensionMismatch


def _object_eye(n):
    m = np.zeros((n, n), dtype=object)
    for i in range(n):
        m[i, i] = 1
    return m


def contract(diagram, box_tensor, wire_size, eye=None, cap=None):
    """Contract ``diagram`` to one tensor.

    ``box_tensor(box)`` must return an array with axes ordered as the
    box's output ports followed by its input ports; ``wire_size(t)``
    gives the axis length for a wire of type ``t``.  ``eye(n)`` builds
    the pass-through identity (object-dtype exact by default).
    """
    if eye is None:
        eye = _object_eye
    if cap is None:
        cap = enumeration_cap()
    fresh = itertools.count().__next__
    n_in = len(diagram.input_types)
    n_out = len(diagram.output_types)
    open_in = [None] * n_in
    open_out = [None] * n_out
    box_out_label = {}
    box_in_label = {}
    nodes = []
    for src, dst in diagram.wires:
        if src[0] == "in" and dst[0] == "out":
            a, b = fresh(), fresh()
            open_out[dst[1]] = a
            open_in[src[1]] = b
            nodes.append([eye(wire_size(diagram.input_types[src[1]])), [a, b]])
            continue
        label = fresh()
        if src[0] == "in":
            open_in[src[1]] = label
        else:
            box_out_label[(src[1], src[2])] = label
        if dst[0] == "out":
            open_out[dst[1]] = label
        else:
            box_in_label[(dst[1], dst[2])] = label
    for b, box in enumerate(diagram.boxes):
        arr = np.asarray(box_tensor(box))
        expected = tuple(wire_size(t) for t in box.outs + box.ins)
        if arr.shape != expected:
            raise DimensionMismatch(
                f"tensor for box {box.name!r} has shape {arr.shape}, "
                f"ports require {expected}"
            )
        labels = [box_out_label[(b, j)] for j in range(len(box.outs))]
        labels += [box_in_label[(b, i)] for i in range(len(box.ins))]
        nodes.append([arr, labels])

    while len(nodes) > 1:
        best = None
        for i in range(len(nodes)):
            ai, li = nodes[i]
            for j in range(i + 1, len(nodes)):
                aj, lj = nodes[j]
                shared = set(li) & set(lj)
                cut = 1
                for k, lab in enumerate(li):
                    if lab in shared:
                        cut *= ai.shape[k]
                result_size = (ai.size // cut) * (aj.size // cut)
                score = (0 if shared else 1, result_size)
                if best is None or score < best[0]:
                    best = (score, i, j, shared, result_size)
        _, i, j, shared, result_size = best
        if result_size > cap:
            raise CapExceeded(
                f"intermediate tensor of size {result_size} exceeds the cap"
            )
        ai, li = nodes[i]
        aj, lj = nodes[j]
        if shared:
            common = sorted(shared)
            merged = np.tensordot(
                ai, aj, axes=([li.index(s) for s in common], [lj.index(s) for s in common])
            )
            labels = [s for s in li if s not in shared] + [s for s in lj if s not in shared]
        else:
            merged = np.tensordot(ai, aj, axes=0)
            labels = li + lj
        nodes[j] = nodes[-1]
        nodes.pop()
        nodes[i] = [merged, labels]

    if not nodes:
        arr, labels = np.asarray(1, dtype=object), []
    else:
        arr, labels = nodes[0]
    want = [open_out[k] for k in range(n_out)] + [open_in[k] for k in range(n_in)]
    return arr.transpose([labels.index(lab) for lab in want])
