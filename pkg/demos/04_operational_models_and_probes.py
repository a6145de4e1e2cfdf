"""
Operational models: predictions, probe tables, and realist images
=================================================================

An operational theory is a list of named procedures with a prediction
backend.  Closed diagrams over the model yield exact predictions; any
process in the model can be pinned down from outside by probing it with
point preparations and atomic questions; and a realist representation,
when one exists, reproduces every prediction.
"""

from pathlib import Path

from ci_engine import fstheory, optheory
from ci_engine.fileformat import load_diagram, load_pairs, load_rep

DATA = Path(__file__).resolve().parent / "data"

# coin_dynamics.diagram bundles a small model (a prepare plus identity
# and flip moves) with a closed diagram over it.
d, pm = load_diagram((DATA / "coin_dynamics.diagram").read_text())
print("procedures:", [decl.name for decl in pm.decls])

prediction = optheory.predict_closed(d, pm)
print("prediction over records:")
for label, row in zip(prediction.cod, prediction.entries):
    print(f"   P({label}) = {row[0]}")

# Probing: feed every point, ask every atomic question.  The table of
# answers reconstructs the process exactly, so the model has no hidden
# slack beyond its predictions.
table = optheory.point_atomic_table(d, pm)
print("probe table rebuilds the prediction:",
      optheory.reconstruct(table) == prediction)

# A realist representation assigns ontic states and maps every
# procedure to dynamics over them.  Applying it to the diagram gives a
# realist image with the same predictions.
rep = load_rep((DATA / "bit_flip.rep").read_text(), pm)
image = fstheory.apply_representation(rep, d)
print("realist image agrees with the model:",
      fstheory.predict(image) == prediction)

# Vetted equivalent pairs: the file carries two diagrams the model
# cannot tell apart, plus the shared model. A representation is
# Leibnizian when it sends such pairs to equal images.
pairs, pm2 = load_pairs((DATA / "prepare_then_sure_id.pairs").read_text())
d1, d2 = pairs[0]
print("pair is operationally equivalent:",
      optheory.op_equivalent(d1, d2, pm2))
