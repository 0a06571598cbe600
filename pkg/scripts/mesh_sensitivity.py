"""File-based sensitivity run: two slab meshes through the CLI, then compared.

Writes a coarse and a fine hex slab as Gmsh files, a parameter file for each,
runs ``fibergen`` on both and finally ``fibergen sensitivity``.

    python scripts/mesh_sensitivity.py [--out DIR] [--coarse N] [--fine N]
"""

import argparse
import os

from fibergen.cli import main as fibergen
from fibergen.mesh import generate_slab_mesh, refine_hex_uniform, write_gmsh
from fibergen.params import generate_file
from fibergen.settings import MESH, declare_parameters


def write_case(directory, mesh):
    os.makedirs(directory, exist_ok=True)
    mesh_path = os.path.join(directory, "slab.msh")
    write_gmsh(mesh, mesh_path)
    tree = declare_parameters()
    tree.set(f"{MESH}/File/Filename", mesh_path)
    tree.set(f"{MESH}/File/Scaling factor", "1e-3")  # mesh lengths are in mm
    prm = os.path.join(directory, "slab.prm")
    with open(prm, "w") as fh:
        fh.write(generate_file(tree, "prm", "standard"))
    return prm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="sensitivity_run")
    ap.add_argument("--coarse", type=int, default=0, help="refinements of the coarse mesh")
    ap.add_argument("--fine", type=int, default=2, help="refinements of the reference mesh")
    args = ap.parse_args()

    base = generate_slab_mesh((24, 24, 36), (4, 4, 6), "hex", jitter=0.1, seed=1)
    vtus = []
    for name, steps in (("coarse", args.coarse), ("fine", args.fine)):
        directory = os.path.join(args.out, name)
        prm = write_case(directory, refine_hex_uniform(base, steps))
        status = fibergen(["-f", prm, "-o", directory])
        if status:
            raise SystemExit(status)
        vtus.append(os.path.join(directory, "fibers.vtu"))
    raise SystemExit(fibergen(["sensitivity", vtus[1], vtus[0], "-o", args.out]))


if __name__ == "__main__":
    main()
