"""
Meridian meshes and Taylor-Hood spaces
======================================

A body of revolution is described by its meridian half-section, a polygon
in the (r, z) plane whose edges on r = 0 are the symmetry axis.  This
script builds two such meshes, refines one, round-trips it through the
text format, and shows how the velocity/pressure space sorts its degrees
of freedom into wall, axis, and interior groups.
"""

from pathlib import Path

from axistokes import (
    GAMMA,
    GAMMA0,
    FemSpace,
    generate_structured,
    read_mesh,
    refine,
    triangulate_polygon,
    write_mesh,
)

out = Path(__file__).resolve().parent / "output"
out.mkdir(exist_ok=True)

# A structured unit square [0,1]_r x [0,1]_z with right-angled triangles.
square = generate_structured((1.0, 1.0), 0.25)
print("structured square:")
print(f"  vertices  {square.n_vertices}")
print(f"  triangles {square.n_triangles}")
print(f"  h_max     {square.h_max:.4f}")

# Edge tags tell the assembly which conditions apply where: GAMMA is
# the physical wall (Dirichlet data lives there), GAMMA0 the symmetry
# axis (conditions follow from the wavenumber, not from data).
n_wall = square.boundary_tags.count(GAMMA)
n_axis = square.boundary_tags.count(GAMMA0)
print(f"  boundary edges: {n_wall} wall, {n_axis} axis")

# An unstructured mesh of an L-shaped section that touches the axis only
# along part of its left side.
l_shape = [(0.0, 0.5), (1.0, 0.5), (1.0, 0.0), (3.0, 0.0), (3.0, 1.0), (0.0, 1.0)]
lmesh = triangulate_polygon(l_shape, target_h=0.25)
print("\nL-shaped section:")
print(f"  vertices  {lmesh.n_vertices}")
print(f"  triangles {lmesh.n_triangles}")
print(f"  h_max     {lmesh.h_max:.4f}")

# Uniform refinement quarters every triangle and halves h.
finer = refine(square)
print("\nafter one refinement of the square:")
print(f"  triangles {finer.n_triangles} (was {square.n_triangles})")
print(f"  h_max     {finer.h_max:.4f} (was {square.h_max:.4f})")

# Meshes persist as plain text; the id ties solution files to the mesh
# they were computed on.
path = out / "square.txt"
write_mesh(square, path)
back = read_mesh(path)
assert back.mesh_id == square.mesh_id
print(f"\nwrote {path} (mesh id {square.mesh_id})")

# The mixed space: quadratic velocity (vertices plus edge midpoints),
# linear pressure (vertices only).
space = FemSpace(square)
print("\nTaylor-Hood space on the square:")
print(f"  velocity dofs per component {space.n_vel}")
print(f"  pressure dofs               {space.n_p}")
print(f"  wall dofs                   {len(space.wall_dofs)}")
print(f"  axis dofs                   {len(space.axis_dofs)}")
print(f"  of which axis-only          {len(space.axis_dofs - space.wall_dofs)}")
