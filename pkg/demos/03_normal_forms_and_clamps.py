"""
Normal forms, reconstruction, and contextual equivalence
========================================================

Every diagram collapses to a canonical shape: its denoted matrix plus
the causal/inferential split of its boundary.  Reconstructing from the
normal form gives a learn-then-apply diagram with the same predictions,
and equivalent diagrams stay equivalent inside any surrounding context.
"""

from fractions import Fraction

from ci_engine import fstheory, substoch
from ci_engine.diagrams import Clamp, Diagram, causal_system, insert_into_clamp

bit = causal_system((0, 1))

# A noisy observation: learn the bit, then push the bit itself through
# a knowledge box that is unsure between identity and flip.
belief = substoch.KnowledgeState(
    (0, 1, 2, 3), (Fraction(0), Fraction(3, 4), Fraction(1, 4), Fraction(0))
)
d = Diagram(
    boxes=(
        fstheory.prop_gain(bit),
        fstheory.state_box(belief),
        fstheory.knowledge_box((bit,), (bit,)),
    ),
    wires=(
        (("in", 0), ("box", 0, 0)),
        (("box", 0, 0), ("box", 2, 1)),
        (("box", 1, 0), ("box", 2, 0)),
        (("box", 0, 1), ("out", 0)),
        (("box", 2, 0), ("out", 1)),
    ),
    input_types=(bit,),
    output_types=(fstheory.record_system(bit), bit),
)

nf = fstheory.normal_form(d)
print("boundary split:",
      f"{len(nf.in_inferential)} inferential + {len(nf.in_causal)} causal in,",
      f"{len(nf.out_inferential)} inferential + {len(nf.out_causal)} causal out")
print("denoted matrix:")
for row in nf.matrix.entries:
    print("  ", [str(v) for v in row])

rebuilt = fstheory.reconstruct(nf)
print("reconstruction preserves predictions:",
      fstheory.inferentially_equivalent(d, rebuilt))

# The quotient factors the matrix into a stochastic part and column
# weights: what the process does versus how often it answers at all.
sigma, pi = fstheory.quotient_normal_form(d)
print("stochastic part columns sum to one:",
      all(sum(col) == 1 for col in zip(*sigma.entries)))

# A clamp is a context with a hole shaped like our diagram.  The
# context below prepares a uniform bit, runs the hole, then learns the
# causal output and discards it.
prepare = Diagram(
    (fstheory.state_box(substoch.uniform_state((0, 1))),
     fstheory.knowledge_box((), (bit,))),
    ((("box", 0, 0), ("box", 1, 0)), (("box", 1, 0), ("out", 0))),
    (), (bit,),
)
finish = Diagram(
    (fstheory.prop_gain(bit), fstheory.ignore(bit)),
    ((("in", 0), ("out", 0)),
     (("in", 1), ("box", 0, 0)),
     (("box", 0, 0), ("box", 1, 0)),
     (("box", 0, 1), ("out", 1))),
    (fstheory.record_system(bit), bit),
    (fstheory.record_system(bit), fstheory.record_system(bit)),
)
clamp = Clamp(prepare, finish, (bit,), d.output_types)

held = insert_into_clamp(clamp, d)
held_rebuilt = insert_into_clamp(clamp, rebuilt)
print("equivalence survives the clamp:",
      fstheory.inferentially_equivalent(held, held_rebuilt))
