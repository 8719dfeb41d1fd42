"""
Growing a random tree crown
===========================

Builds one crown model, checks its volume and scatterer count, and
writes it as a Wavefront OBJ that any mesh viewer can open.
"""

import numpy as np

from foliage_rt import CrownParams, generate_foliage
from foliage_rt.geometry import point_in_mesh, triangle_areas

# 600 m^3 of crown filled with 2 m^2 triangles at 0.25 per m^3
params = CrownParams(area=2.0, volume=600.0, xi=0.1, density=0.25, seed=42)
model = generate_foliage(params)

print(f"envelope volume  {model.achieved_volume:.6f} m^3 (target {params.volume})")
print(f"scale factor     {model.scale:.4f} after {model.attempts} draw(s)")
print(f"crown diameter   {model.diameter:.2f} m")
print(f"scatterers       {model.n_scatterers}")

# every face has the requested area
areas = triangle_areas(model.scatterers.faces)
print(f"face areas       {areas.min():.12f} .. {areas.max():.12f} m^2")

# only the face centers are guaranteed to sit inside the envelope
centers = model.scatterers.centroids
inside = np.array([point_in_mesh(c, model.envelope) for c in centers])
print(f"centers inside   {inside.sum()} / {len(inside)}")

# a sparser crown with the same seed keeps the same envelope
sparse = generate_foliage(params.replace(density=0.05))
same = np.array_equal(sparse.envelope.faces, model.envelope.faces)
print(f"sparse crown     {sparse.n_scatterers} faces, same envelope: {same}")

model.to_obj("crown_seed42.obj")
model.to_json("crown_seed42.json")
print("wrote crown_seed42.obj / crown_seed42.json")
