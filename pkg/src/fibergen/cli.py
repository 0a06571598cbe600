"""Command-line front end.

    fibergen -g [minimal|full] [-f FILE]      write a default parameter file
    fibergen [-f FILE] [-o DIR] [-l LOG] [-d]  run (or, with -d, only log/convert)
    fibergen sensitivity REF.vtu COARSE.vtu    compare two fiber fields

Exit codes: 0 success, 1 parameter error, 2 mesh or I/O error, 3 solver error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    CliError,
    FiberGenError,
    IoError,
    MeshError,
    MissingFlagArgument,
    UnknownFlag,
)
from .params import format_from_path, generate_file, parse_file

log = logging.getLogger("fibergen")

EXECUTABLE = "fibergen"


@dataclass(frozen=True)
class CliOptions:
    mode: str                      # help | generate | run | sensitivity
    params_path: str = f"{EXECUTABLE}.prm"
    output_dir: str = "."
    log_filename: str = "log_params.prm"
    dry_run: bool = False
    generate_verbosity: str = "standard"
    reference: str | None = None   # sensitivity mode only
    coarse: str | None = None
    csv_path: str | None = None

    @property
    def params_format(self):
        return format_from_path(self.params_path)

    @property
    def log_format(self):
        return format_from_path(self.log_filename)

    @property
    def log_path(self):
        return os.path.join(self.output_dir, self.log_filename)


class _Parser(argparse.ArgumentParser):
    """argparse with failures raised as CliError instead of exiting."""

    def error(self, message):
        if "unrecognized arguments" in message:
            raise UnknownFlag(message)
        if "expected one argument" in message or "required" in message:
            raise MissingFlagArgument(message)
        raise CliError(message)


def _run_parser(prog):
    p = _Parser(prog=prog, add_help=False,
                description="Generate myocardial fiber fields with Laplace-Dirichlet rule-based methods.")
    p.add_argument("-h", "--help", action="store_true", help="print this help and exit")
    p.add_argument("-g", "--generate-params", nargs="?", const="standard",
                   choices=("minimal", "standard", "full"), metavar="minimal|full",
                   help="write a parameter file with default values (standard verbosity by default)")
    p.add_argument("-f", "--params-filename", metavar="FILE",
                   help=f"parameter file to read or generate; .prm, .json or .xml (default {prog}.prm)")
    p.add_argument("-o", "--output-directory", metavar="DIR", default=".",
                   help="directory for all outputs, created if missing (default: current)")
    p.add_argument("-l", "--log-file", metavar="FILE",
                   help="parameter log filename; without extension the input one is used "
                        "(default log_params.<ext>)")
    p.add_argument("-d", "--dry-run", action="store_true",
                   help="stop after writing the parameter log (checks and converts parameters)")
    return p


def _sensitivity_parser(prog):
    p = _Parser(prog=f"{prog} sensitivity", add_help=False,
                description="Angle between the fiber fields of two VTU files, sampled at the "
                            "reference vertices.")
    p.add_argument("-h", "--help", action="store_true", help="print this help and exit")
    p.add_argument("reference", nargs="?", help="fine (reference) result, .vtu")
    p.add_argument("coarse", nargs="?", help="coarse result, .vtu")
    p.add_argument("-o", "--output-directory", metavar="DIR", default=".")
    p.add_argument("--csv", metavar="FILE", help="per-vertex CSV (default <DIR>/sensitivity.csv)")
    return p


def help_text(prog=EXECUTABLE):
    return (_run_parser(prog).format_help() + "\nsubcommands:\n  sensitivity REF.vtu COARSE.vtu"
            " [-o DIR] [--csv FILE]\n                        compare fiber fields of two runs\n")


def parse_cli(argv, prog=EXECUTABLE):
    """Map command-line arguments to CliOptions."""
    argv = list(argv)
    if argv and argv[0] == "sensitivity":
        ns = _sensitivity_parser(prog).parse_args(argv[1:])
        if ns.help:
            return CliOptions("help")
        if ns.reference is None or ns.coarse is None:
            raise MissingFlagArgument("sensitivity needs REF.vtu and COARSE.vtu")
        csv_path = ns.csv or os.path.join(ns.output_directory, "sensitivity.csv")
        return CliOptions("sensitivity", output_dir=ns.output_directory, reference=ns.reference,
                          coarse=ns.coarse, csv_path=csv_path)

    ns = _run_parser(prog).parse_args(argv)
    if ns.help:
        return CliOptions("help")
    params = ns.params_filename or f"{prog}.prm"
    ext = os.path.splitext(params)[1] or ".prm"
    log_name = ns.log_file or "log_params"
    if not os.path.splitext(log_name)[1]:
        log_name += ext
    if ns.generate_params is not None:
        return CliOptions("generate", params_path=params, output_dir=ns.output_directory,
                          log_filename=log_name, generate_verbosity=ns.generate_params)
    return CliOptions("run", params_path=params, output_dir=ns.output_directory,
                      log_filename=log_name, dry_run=ns.dry_run)


def _write(path, text):
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _read(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None


def load_mesh(settings):
    """Read, scale and refine the mesh named in the mesh settings."""
    from .mesh import read_gmsh, refine_hex_uniform, scale_mesh

    if not settings.filename:
        raise IoError("Fiber generation/Mesh and space discretization/File/Filename: no mesh file given")
    try:
        mesh = read_gmsh(settings.filename)
    except OSError as exc:
        raise IoError(f"cannot read mesh {settings.filename}: {exc}") from None
    if mesh.kind is not settings.element_kind:
        raise MeshError(f"{settings.filename} holds {mesh.kind.value} cells but Element type "
                        f"is {settings.element_kind.value}")
    mesh = scale_mesh(mesh, settings.scaling_factor)
    return refine_hex_uniform(mesh, settings.n_refinements)


def execute(options, tree=None, out=None):
    """Carry out ``options``; returns the exit status. Errors propagate as FiberGenError."""
    out = sys.stdout if out is None else out
    from .settings import declare_parameters

    if options.mode == "help":
        out.write(help_text())
        return 0
    if options.mode == "sensitivity":
        return _sensitivity(options, out)

    tree = declare_parameters() if tree is None else tree
    if options.mode == "generate":
        _write(options.params_path,
               generate_file(tree, options.params_format, options.generate_verbosity))
        out.write(f"parameter file written to {options.params_path}\n")
        return 0

    params = parse_file(tree, _read(options.params_path), options.params_format)
    os.makedirs(options.output_dir, exist_ok=True)
    _write(options.log_path, generate_file(params, options.log_format, "full"))
    log.info("parameter log written to %s", options.log_path)
    if options.dry_run:
        return 0
    return _run(params, options, out)


def _run(params, options, out):
    from .ldrbm import generate_fibers
    from .output import write_vtu
    from .settings import config_from_params

    config = config_from_params(params)
    mesh = load_mesh(config.mesh)
    log.info("mesh: %d vertices, %d %s cells", mesh.n_vertices, mesh.n_cells, mesh.kind.value)
    result = generate_fibers(mesh, config.geometry, config.solver)
    for line in result.report.lines():
        log.info("%s", line)
    if config.output.enabled:
        path = write_vtu(mesh, result, config.output, options.output_dir)
        out.write(f"fibers written to {path}\n")
    return 0


def _sensitivity(options, out):
    from .analysis import angle_error, locate_and_interpolate
    from .output import mesh_from_vtu, read_vtu

    ref = read_vtu(options.reference)
    coarse = read_vtu(options.coarse)
    for name, data in (("reference", ref), ("coarse", coarse)):
        if "fiber_f" not in data.point_data:
            raise IoError(f"{name} file has no fiber_f array")
    interp = locate_and_interpolate(mesh_from_vtu(coarse), coarse.point_data["fiber_f"], ref.points)
    report = angle_error(interp.values, ref.point_data["fiber_f"], int(np.sum(interp.outside)))
    out.write(f"{'reference points':>18} {'outside':>8} {'avg [deg]':>12} {'max [deg]':>12}\n")
    out.write(f"{len(ref.points):>18d} {report.n_points_outside:>8d} "
              f"{report.avg_error:>12.6f} {report.max_error:>12.6f}\n")
    out.write(report.summary() + "\n")
    parent = os.path.dirname(options.csv_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    try:
        report.write_csv(options.csv_path)
    except OSError as exc:
        raise IoError(f"cannot write {options.csv_path}: {exc}") from None
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    argv = sys.argv[1:] if argv is None else argv
    try:
        return execute(parse_cli(argv))
    except FiberGenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
