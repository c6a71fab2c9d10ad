"""Command line entry point.

    gvsc-sim run <config.ini> [--figures]
    gvsc-sim schemes
    gvsc-sim budget <scheme> [--dims F,H,W,C]
    gvsc-sim make-fixtures <dir> [--count N] [--dims F,H,W,C]

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..budget import DEFAULT_DIMS, VideoDims, round_sig, scheme_budget
from ..corefmt import write_tensor
from ..errors import GvscError
from ..strategy import ADAPTIVE_LDPC_TABLE, SchemeKind, build_tx_chain, default_catalog
from .config import DEFAULT_DESCRIPTION, load_config
from .runner import read_csv, run, synthetic_video, write_report

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _dims(text: str) -> VideoDims:
    try:
        f, h, w, c = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("dims must look like F,H,W,C") from None
    return VideoDims(f, h, w, c)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    records = run(cfg)
    out = write_report(cfg, records)
    print(f"wrote {len(records)} rows to {out}")
    if args.figures or cfg.figures:
        from .plotting import render_figures

        for path in render_figures(read_csv(out), out):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_schemes(args) -> int:
    for scheme in default_catalog().values():
        b = scheme_budget(scheme)
        chain = build_tx_chain(scheme, snr_db=ADAPTIVE_LDPC_TABLE.rows[0][0])
        print(f"{scheme.name:<15} {scheme.display_name:<18} CBR {scheme.published_cbr:<7g} (exact {b.cbr:.6g})")
        print(f"    {chain.describe()}")
    print()
    print("H26xLdpc configurations:")
    print(ADAPTIVE_LDPC_TABLE.to_text(), end="")
    return EXIT_OK


def cmd_budget(args) -> int:
    scheme = default_catalog()[SchemeKind.parse(args.scheme)]
    b = scheme_budget(scheme, args.dims)
    print(f"scheme          {scheme.name}")
    print(f"k_text          {b.k_text:.6g}")
    print(f"k_visual        {b.k_visual:.6g}")
    print(f"k_total         {b.k_total:.6g}")
    print(f"denominator     {b.denominator}")
    print(f"cbr_exact       {b.cbr:.6g}")
    print(f"cbr_published   {scheme.published_cbr:g}")
    print(f"cbr_rounded     {round_sig(b.cbr, scheme.published_sig_figs):g}")
    return EXIT_OK


def cmd_make_fixtures(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        path = out / f"clip{i}.gvt"
        write_tensor(synthetic_video(i, args.dims), path)
        path.with_suffix(".gvt.txt").write_text(DEFAULT_DESCRIPTION + "\n")
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gvsc-sim", description="Semantic video link simulator")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment manifest and write the CSV report")
    r.add_argument("config")
    r.add_argument("--figures", action="store_true", help="also render PNG figures next to the CSV")
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("schemes", help="list the scheme catalog and LDPC table")
    s.set_defaults(func=cmd_schemes)
    b = sub.add_parser("budget", help="print the link budget of one scheme")
    b.add_argument("scheme")
    b.add_argument("--dims", type=_dims, default=DEFAULT_DIMS)
    b.set_defaults(func=cmd_budget)
    m = sub.add_parser("make-fixtures", help="write synthetic GVT clips with descriptions")
    m.add_argument("directory")
    m.add_argument("--count", type=int, default=3)
    m.add_argument("--dims", type=_dims, default=DEFAULT_DIMS)
    m.set_defaults(func=cmd_make_fixtures)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GvscError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
