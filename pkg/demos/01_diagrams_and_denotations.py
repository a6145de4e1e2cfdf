"""
Building diagrams and reading off their predictions
===================================================

A diagram wires boxes together; denoting it multiplies out one exact
substochastic matrix.  Two diagrams that look nothing alike can still
denote the same matrix, and the engine can tell you so.
"""

from fractions import Fraction
from pathlib import Path

from ci_engine import fstheory, substoch
from ci_engine.diagrams import Diagram, causal_system, diagrams_equal, from_box
from ci_engine.fileformat import load_diagram

DATA = Path(__file__).resolve().parent / "data"

# A knowledge box applies whatever function its hom wire says.  Feeding
# it a point state at the code of the flip function turns it into a
# deterministic bit flip.
bit = causal_system((0, 1))
kb = fstheory.knowledge_box((bit,), (bit,))
flip_code = 2
flip_state = fstheory.state_box(substoch.point_state((0, 1, 2, 3), flip_code))

d = Diagram(
    boxes=(flip_state, kb),
    wires=(
        (("box", 0, 0), ("box", 1, 0)),
        (("in", 0), ("box", 1, 1)),
        (("box", 1, 0), ("out", 0)),
    ),
    input_types=(bit,),
    output_types=(bit,),
)
print("flip box denotes:")
for row in fstheory.denote(d).entries:
    print("  ", [str(v) for v in row])

# Mixing beliefs instead of picking a point gives a stochastic matrix.
# The classic pair: an even mixture of the two constant functions and
# an even mixture of identity and flip.  Different ensembles, same
# knowledge, and the engine treats them as the same process.
d_const, _ = load_diagram((DATA / "omelette_constants.diagram").read_text())
d_rev, _ = load_diagram((DATA / "omelette_reversible.diagram").read_text())

print("\nconstants mixture denotes:")
for row in fstheory.denote(d_const).entries:
    print("  ", [str(v) for v in row])

print("same wiring?      ", diagrams_equal(d_const, d_rev))
print("same predictions? ", fstheory.inferentially_equivalent(d_const, d_rev))

# Embedded matrices round-trip: denoting a single embedded box returns
# the matrix unchanged, entry for entry.
m = substoch.SubstochMap(
    (0, 1), (0, 1, 2),
    ((Fraction(1, 3), Fraction(0)),
     (Fraction(1, 3), Fraction(1, 2)),
     (Fraction(1, 3), Fraction(1, 4))),
)
back = fstheory.denote(from_box(fstheory.embedded(m)))
print("\nembedded matrix survives unchanged:", back == m)
