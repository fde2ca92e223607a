"""Command line entry point: ``maclab <subcommand> [options]``.

Every subcommand writes one table (CSV by default, JSON on request) whose
header records the full configuration and the seed. Exit status is 0 on
success, 2 for invalid input and 3 for runtime or I/O failures.
"""

import argparse
import os
import sys

import numpy as np

from . import capacity, designs, mimo, psk_geometry, rotation, trellis
from .constellation import ValidationError, make_constellation, rotate
from .io import FORMATS, render_table
from .rng import DEFAULT_SEED, SEED_ENV, default_seed

TABLE_SNRS = [-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0]


def _positive(kind):
    def f(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return f


def _common(p, samples=None):
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--workers", type=_positive(int), default=1)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    if samples is not None:
        p.add_argument("--samples", type=_positive(int), default=samples)


def _alphabet(p, kind="PSK", m=4):
    p.add_argument("--constellation", choices=["PSK", "PAM", "QAM"], default=kind)
    p.add_argument("--m", type=_positive(int), default=m)


def build_parser():
    ap = argparse.ArgumentParser(prog="maclab", description="Two-user multiple access channel experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rotation-table", help="optimal relative rotation per SNR")
    _alphabet(p)
    p.add_argument("--snr-db", type=float, nargs="+", default=TABLE_SNRS)
    p.add_argument("--theta-step-deg", type=_positive(float), default=0.0625)
    _common(p)

    p = sub.add_parser("capacity-region", help="constellation-constrained capacity region")
    _alphabet(p)
    p.add_argument("--snr-db", type=float, nargs="+", default=[0.0])
    p.add_argument("--theta-deg", type=float, default=0.0, help="rotation of user 2's alphabet")
    p.add_argument("--gaussian", action="store_true", help="closed-form Gaussian-input region instead")
    _common(p, samples=100_000)

    p = sub.add_parser("partition-report", help="sub-sum distances of two-cell PSK partitions")
    p.add_argument("--m", type=_positive(int), default=8)
    p.add_argument("--theta-deg", type=float, default=22.5)
    p.add_argument("--search", action="store_true", help="also run the exhaustive partition search")
    _common(p)

    p = sub.add_parser("free-distance", help="free distance of a sum trellis")
    p.add_argument("--preset", choices=sorted(trellis.PRESETS), default="four-state")
    p.add_argument("--trellis", default=None, help="trellis text file (overrides --preset)")
    _common(p)

    p = sub.add_parser("mimo", help="MIMO-MAC capacity, BER or design export")
    p.add_argument("--task", choices=["capacity", "ber", "design"], default="capacity")
    p.add_argument("--nt", type=_positive(int), default=2)
    p.add_argument("--snr-db", type=float, nargs="+", default=None)
    p.add_argument("--min-errors", type=_positive(int), default=100)
    p.add_argument("--max-bits", type=_positive(int), default=10**7)
    _common(p, samples=100_000)

    p = sub.add_parser("trellis", help="validate a trellis file and echo it in canonical form")
    p.add_argument("path")
    _common(p)
    return ap


def _seed(args):
    if args.seed is not None:
        return args.seed, "flag"
    v = os.environ.get(SEED_ENV)
    try:
        return default_seed(), (SEED_ENV if v not in (None, "") else "default")
    except ValueError:
        raise ValidationError("seed", f"{SEED_ENV} must be an integer, got {v!r}") from None


def _meta(args, seed, source, units):
    m = {k: (" ".join(map(str, v)) if isinstance(v, list) else v) for k, v in vars(args).items()}
    m.pop("out", None)
    m.update(seed=seed, seed_source=source, units=units)
    return {k: v for k, v in m.items() if v is not None}


def cmd_rotation_table(args, seed):
    c = make_constellation(args.constellation, args.m)
    rows = []
    for s in args.snr_db:
        r = rotation.optimal_rotation(c, s, args.theta_step_deg)
        rows.append([float(s), r.theta_star, r.multiplicity])
    return "snr in dB, angle in degrees", ["snr_db", "theta_star_deg", "multiplicity"], rows


def cmd_capacity_region(args, seed):
    cols = ["snr_db", "quantity", "value", "std_error", "samples"]
    rows = []
    for s in args.snr_db:
        if args.gaussian:
            reg = capacity.gaussian_region(10.0 ** (s / 10.0))
        else:
            c = capacity.at_snr(make_constellation(args.constellation, args.m), s)
            c2 = rotate(c, np.deg2rad(args.theta_deg))
            noise = capacity.NoiseModel(2.0, seed)
            reg = capacity.capacity_region(c, c2, noise, args.samples, args.workers)
        for q in ("r1_max", "r2_max", "sum_max"):
            e = getattr(reg, q)
            rows.append([float(s), q, e.value, e.std_error, e.n_samples])
    return "bits per channel use", cols, rows


def cmd_partition_report(args, seed):
    M, theta = args.m, np.deg2rad(args.theta_deg)
    c1, c2 = psk_geometry.psk_pair(M, theta)
    ung = psk_geometry.ungerboeck_split(M)
    rep = psk_geometry.partition_sumset_dmin(ung, ung, c1, c2)
    rows = [["parity", k, getattr(rep, k)] for k in ("dee", "deo", "doe", "doo")]
    rows.append(["parity", "bottleneck", rep.bottleneck])
    th, _ = psk_geometry.reduce_angle(M, theta)
    if M >= 8:
        rows.append(["closed-form", "dee", psk_geometry.dmin_formula_ee(M, th)])
        rows.append(["closed-form", "deo", psk_geometry.dmin_formula_eo(M, th)])
    if args.search:
        res = psk_geometry.exhaustive_partition_search(M, th)
        rows.append(["search", "bottleneck", res.best.bottleneck])
        rows.append(["search", "maximizers", len(res.maximizers)])
        rows.append(["search", "parity_optimal", res.ungerboeck_optimal])
    return "Euclidean distance, unit-energy PSK", ["partition", "quantity", "value"], rows


def cmd_free_distance(args, seed):
    if args.trellis:
        with open(args.trellis) as f:
            t, _ = trellis.parse_trellis(f.read())
        name = args.trellis
    else:
        t, name = trellis.PRESETS[args.preset](), args.preset
    d = {s: trellis.free_distance(trellis.scenario_sum_trellis(t, s)) for s in trellis.SCENARIOS}
    rows = [
        [name, "psk", "QPSK, pi/4", d["psk"]],
        [name, "pam", "4-PAM, pi/2", d["pam"]],
        [name, "gain_db", "pam over psk", trellis.coding_gain_db(d["pam"], d["psk"])],
    ]
    return "squared Euclidean distance, unit-energy alphabets; gain in dB", ["trellis", "scenario", "alphabets", "value"], rows


def cmd_mimo(args, seed):
    Nt = args.nt
    rod = designs.make_rod(Nt)
    if args.task == "design":
        rows = [[i + 1, line] for i, line in enumerate(rod.to_text().splitlines())]
        return f"{rod.l} x {rod.Nt} rate-1 real orthogonal design", ["row", "entries"], rows
    if args.task == "capacity":
        snrs = args.snr_db or [0.0, 5.0, 10.0, 15.0, 20.0]
        rows = []
        for s in snrs:
            rho = float(mimo.db_to_linear(s))
            est = {
                "mac_sum": mimo.mac_sum_capacity(Nt, rho, args.samples, seed, workers=args.workers),
                "sod": mimo.stbc_mutual_info(designs.make_sod(rod), rho, "SOD", args.samples, seed, args.workers),
                "rod": mimo.stbc_mutual_info(rod, rho, "ROD", args.samples, seed, args.workers),
                "rod_closed_form": mimo.rod_closed_form_capacity(Nt, rho, args.samples, seed, args.workers),
            }
            rows += [[float(s), k, e.value, e.std_error, e.n_samples] for k, e in est.items()]
        return "bits per channel use", ["snr_db", "quantity", "value", "std_error", "trials"], rows
    snrs = args.snr_db or list(mimo.BER_GRID_DB)
    rows = []
    for scheme in mimo.SCHEMES:
        c = mimo.ber_simulation(scheme, Nt, snrs, args.min_errors, args.max_bits, seed, workers=args.workers)
        rows += [[scheme, float(s), float(b), int(e), int(n)] for s, b, e, n in zip(c.snr_db, c.ber, c.errors, c.bits)]
    return "bit error rate; trials counted in bits", ["scheme", "snr_db", "value", "errors", "trials"], rows


def cmd_trellis(args, seed):
    with open(args.path) as f:
        t, idx = trellis.parse_trellis(f.read())
    if not t.is_connected():
        raise ValidationError("connectivity", "trellis is not strongly connected")
    text = trellis.format_trellis(t, idx)
    rows = [line.split() for line in text.splitlines()[1:]]
    return f"{t.n_states} states, {t.n_branches} branches", ["from", "to", "label_index"], rows


COMMANDS = {
    "rotation-table": cmd_rotation_table,
    "capacity-region": cmd_capacity_region,
    "partition-report": cmd_partition_report,
    "free-distance": cmd_free_distance,
    "mimo": cmd_mimo,
    "trellis": cmd_trellis,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        seed, source = _seed(args)
        print(f"maclab: seed {seed} ({source})", file=sys.stderr)
        units, cols, rows = COMMANDS[args.command](args, seed)
        text = render_table(_meta(args, seed, source, units), cols, rows, args.format)
    except ValidationError as e:
        print(f"maclab: invalid input: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"maclab: I/O error on {e.filename or '?'}: {e.strerror or e}", file=sys.stderr)
        return 3
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as e:
        print(f"maclab: runtime error: {e}", file=sys.stderr)
        return 3
    if args.out:
        try:
            with open(args.out, "w") as f:
                f.write(text)
        except OSError as e:
            print(f"maclab: cannot write {args.out}: {e.strerror or e}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
