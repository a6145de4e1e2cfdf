"""
Simplex embeddings: when a fragment admits a classical explanation
==================================================================

A fragment of states and effects embeds in a simplex when some finite
set of ontic states reproduces every pairing with probability vectors
and response functions.  The search is an exact LP, so feasibility
comes with explicit images and infeasibility with a Farkas witness.
"""

from fractions import Fraction
from pathlib import Path

from ci_engine import nogo
from ci_engine.fileformat import load_fragment

DATA = Path(__file__).resolve().parent / "data"

# The classical bit embeds as itself.
bit = load_fragment((DATA / "bit.fragment").read_text())
res = nogo.simplex_embed(bit)
print("bit:", type(res).__name__, "at size", res.size)
print("  state images:",
      [[str(v) for v in img] for img in res.state_images])

# Six eigenstates of the qubit X, Y, Z axes with the three sharp
# measurements: four ontic states suffice.
octa = load_fragment((DATA / "octahedron.fragment").read_text())
res = nogo.simplex_embed(octa)
print("octahedron:", type(res).__name__, "at size", res.size)

# Six coplanar states at hexagon vertices with three distinguishing
# measurements: no simplex of any size reproduces the pairings.
hexa = load_fragment((DATA / "hexagon.fragment").read_text())
res = nogo.simplex_embed(hexa, lambda_max=16)
print("hexagon:", type(res).__name__, "for every size up to", res.up_to)
print("  witness length:", len(res.witness))

# Mixing each hexagon state halfway toward the center restores a
# classical explanation: noise washes out the obstruction.
soft_states = tuple(
    (s[0], Fraction(s[1], 2), Fraction(s[2], 2)) for s in hexa.states
)
soft = nogo.GPTFragment(soft_states, hexa.effects, hexa.unit)
res = nogo.simplex_embed(soft, lambda_max=16)
print("hexagon at half noise:", type(res).__name__, "at size", res.size)
