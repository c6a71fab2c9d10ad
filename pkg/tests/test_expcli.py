import math

import numpy as np
import pytest

from gvsc_sim.budget import VideoDims, scheme_budget
from gvsc_sim.corefmt import write_tensor
from gvsc_sim.errors import ConfigurationError
from gvsc_sim.expcli import cli
from gvsc_sim.expcli.config import ADAPTIVE, ExperimentConfig, parse_config
from gvsc_sim.expcli.plotting import series
from gvsc_sim.expcli.runner import (
    CSV_COLUMNS,
    UNSUPPORTED,
    FixtureError,
    derive_seed,
    mix64,
    read_csv,
    run,
    run_cell,
    run_text_chain,
    substream,
    synthetic_video,
    to_csv,
    write_report,
)
from gvsc_sim.strategy import SchemeKind, TextChain, default_catalog

SMALL = VideoDims(2, 64, 64, 3)


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    root = tmp_path_factory.mktemp("clips")
    paths = []
    for i in range(2):
        p = root / f"clip{i}.gvt"
        write_tensor(synthetic_video(i, SMALL), p)
        p.with_suffix(".gvt.txt").write_text("a small test clip of a moving disc\n")
        paths.append(p)
    return paths


def manifest(tmp_path, fixtures, schemes="DescOnly, SketchDesc", grid="0, 2, 4, 6, 8, 10", trials=3, extra=""):
    names = ", ".join(str(p) for p in fixtures)
    return (
        f"[experiment]\nschemes = {schemes}\nsnr_grid_db = {grid}\ntrials = {trials}\n"
        f"fixtures = {names}\noutput = {tmp_path / 'out.csv'}\n{extra}"
    )


# --- seeds -------------------------------------------------------------------


def test_splitmix_reference_value():
    assert mix64(0) == 0xE220A8397B1DCDAF


def test_derive_seed_deterministic():
    assert derive_seed(7777, 2, 3, 1) == derive_seed(7777, 2, 3, 1)


def test_derive_seed_no_collisions():
    seen = {derive_seed(7777, s, i, t) for s in range(1, 9) for i in range(11) for t in range(1137)}
    assert len(seen) == 8 * 11 * 1137 >= 10**5


def test_derive_seed_each_index_matters():
    ref = derive_seed(1, 2, 3, 4)
    assert len({ref, derive_seed(2, 2, 3, 4), derive_seed(1, 3, 3, 4), derive_seed(1, 2, 4, 4), derive_seed(1, 2, 3, 5)}) == 5


def test_substreams_differ():
    s = derive_seed(7777, 1, 0, 0)
    assert len({substream(s, k) for k in range(100)}) == 100


# --- config ------------------------------------------------------------------


def test_parse_config(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, extra="loss_k = 0.5\nthreshold_db = 2\n"))
    assert [s.name for s in cfg.schemes] == ["DescOnly", "SketchDesc"]
    assert cfg.snr_grid_db == (0, 2, 4, 6, 8, 10) and cfg.trials == 3
    assert cfg.loss_k == 0.5 and cfg.threshold_db == 2.0


def test_scheme_override(tmp_path, fixtures):
    text = manifest(tmp_path, fixtures) + "[scheme:SketchDesc]\nsymbols = 512\navg_tokens = 10\n"
    cfg = parse_config(text)
    sketch = cfg.schemes[1]
    assert sketch.visual_chain.symbols == 512 and sketch.text_chain.avg_tokens == 10


def test_adaptive_and_relative_paths(tmp_path):
    cfg = parse_config("[experiment]\nschemes = Adaptive\nfixtures = a.gvt\noutput = r.csv\n", tmp_path)
    assert cfg.schemes == (ADAPTIVE,)
    assert cfg.fixture_paths == (tmp_path / "a.gvt",) and cfg.output_path == tmp_path / "r.csv"


@pytest.mark.parametrize(
    "text",
    [
        "[other]\nx = 1\n",
        "[experiment]\nschemes = Mpeg\n",
        "[experiment]\nschemes = DescOnly\ncolour = red\n",
        "[experiment]\nschemes = DescOnly\ntrials = 0\n",
        "[experiment]\nschemes = DescOnly\ntrials = many\n",
        "[experiment]\nschemes = DescOnly\nloss_k = 2\n",
        "[experiment]\nschemes =\n",
        "[experiment]\nschemes = DescOnly\n[scheme:DescOnly]\nsymbols = 5\n",
        "[experiment]\nschemes = DescOnly\n[scheme:SketchDesc]\nsymbols = 5\nvisual_cbr = 0.1\n",
        "[experiment]\nschemes = DescOnly\n[extra]\n",
        "not an ini file",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config(text)


# --- sweep -------------------------------------------------------------------


def test_row_count_and_order(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures))
    records = run(cfg)
    assert len(records) == 2 * 6 * 3
    keys = [(r.scheme, r.snr_db, r.trial_index) for r in records]
    assert keys == [(s, snr, t) for s in ("DescOnly", "SketchDesc") for snr in (0, 2, 4, 6, 8, 10) for t in range(3)]


def test_desc_only_clean_at_10db(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="DescOnly", grid="10", trials=1))
    rec = run(cfg)[0]
    assert rec.ber_text == 0.0 and rec.bler_text == 0.0
    assert rec.visual_mse is None and rec.psnr is None
    assert rec.cbr_published == 0.0007


def test_cbr_columns_match_budget(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="SketchDesc, FirstFrameDesc", grid="4", trials=1))
    for rec, scheme in zip(run(cfg), cfg.schemes):
        assert rec.cbr_exact == scheme_budget(scheme, SMALL).cbr
        assert rec.cbr_published == scheme.published_cbr


def test_double_run_byte_identical(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, grid="0, 10", trials=2))
    assert to_csv(run(cfg)) == to_csv(run(cfg))


def test_workers_do_not_change_output(tmp_path, fixtures):
    text = manifest(tmp_path, fixtures, schemes="SketchDesc, H26xLdpc", grid="2, 8", trials=2)
    serial = to_csv(run(parse_config(text)))
    parallel = to_csv(run(parse_config(text + "workers = 2\n")))
    assert serial == parallel


def test_wall_time_opt_in(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="DescOnly", grid="10", trials=1, extra="record_wall_time = true\n"))
    assert run(cfg)[0].wall_time > 0


def test_unsupported_regime_row(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="H26xLdpc", grid="-2, 10", trials=1))
    low, high = run(cfg)
    assert low.ber_text == UNSUPPORTED and low.bler_text == UNSUPPORTED
    assert high.ber_text == 0.0
    assert UNSUPPORTED in to_csv([low])


def test_adaptive_switches(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="Adaptive", grid="0, 6", trials=1))
    low, high = run(cfg)
    assert low.visual_mse is None and low.cbr_published == 0.0007
    assert high.visual_mse is not None and high.cbr_published == 0.0031


def test_visual_quality_improves_with_snr(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="DjsccRgb", grid="0, 5, 10, 20", trials=1))
    mses = [r.visual_mse for r in run(cfg)]
    assert all(a > b for a, b in zip(mses, mses[1:]))


def test_synthetic_fallback():
    cfg = ExperimentConfig(schemes=(default_catalog()[SchemeKind.DESC_ONLY],), snr_grid_db=(10.0,))
    rec = run_cell(cfg, 0, 0, 0)
    assert rec.cbr_exact == pytest.approx(0.00073, abs=1e-6)
    assert synthetic_video(3).shape == (8, 256, 256, 3)


def test_empty_description():
    with pytest.raises(ConfigurationError):
        run_text_chain(TextChain(), "", 5.0, 1)


def test_missing_fixture(tmp_path):
    cfg = parse_config(f"[experiment]\nschemes = DescOnly\nfixtures = missing.gvt\n", tmp_path)
    with pytest.raises(FixtureError):
        run(cfg)


def test_csv_roundtrip(tmp_path, fixtures):
    cfg = parse_config(manifest(tmp_path, fixtures, schemes="DescOnly, DjsccRgb", grid="5", trials=1))
    path = write_report(cfg, run(cfg))
    rows = read_csv(path)
    assert tuple(rows[0]) == CSV_COLUMNS
    assert rows[0]["psnr"] == "" and float(rows[1]["psnr"]) > 0
    assert rows[0]["wall_time"] == ""


def test_csv_infinity_cell():
    from gvsc_sim.expcli.runner import TrialRecord

    text = to_csv([TrialRecord("X", 1.0, 0, 0.1, 0.1, psnr=math.inf)])
    assert text.splitlines()[1].split(",")[8] == "inf"


def test_series_groups_by_scheme():
    rows = [
        {"scheme": "A", "snr_db": "0", "psnr": "10"},
        {"scheme": "A", "snr_db": "0", "psnr": "20"},
        {"scheme": "A", "snr_db": "5", "psnr": "inf"},
        {"scheme": "B", "snr_db": "0", "psnr": ""},
    ]
    out = series(rows, "psnr")
    assert out["A"][0] == [0.0] and out["A"][1] == [15.0]
    assert "B" not in out


# --- command line ------------------------------------------------------------


def test_cli_run_with_figures(tmp_path, fixtures, capsys):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(manifest(tmp_path, fixtures, schemes="DescOnly, DjsccRgb", grid="0, 10", trials=1))
    assert cli.main(["run", str(cfg), "--figures"]) == 0
    assert (tmp_path / "out.csv").exists()
    pngs = sorted(p.name for p in tmp_path.glob("out_*.png"))
    assert "out_psnr.png" in pngs and "out_ber_text.png" in pngs


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nschemes = Nope\n")
    assert cli.main(["run", str(bad)]) == 1
    assert cli.main(["run", str(tmp_path / "absent.ini")]) == 2
    missing = tmp_path / "m.ini"
    missing.write_text("[experiment]\nschemes = DescOnly\nfixtures = gone.gvt\n")
    assert cli.main(["run", str(missing)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_schemes(capsys):
    assert cli.main(["schemes"]) == 0
    out = capsys.readouterr().out
    assert "SketchDesc" in out and "0 dB: 1/3 LDPC+4QAM" in out


def test_cli_budget(capsys):
    assert cli.main(["budget", "SketchDesc"]) == 0
    out = capsys.readouterr().out
    assert "k_total         2171.56" in out and "cbr_published   0.001" in out
    assert cli.main(["budget", "FirstFrameDesc", "--dims", "2,64,64,3"]) == 0


def test_cli_make_fixtures(tmp_path, capsys):
    assert cli.main(["make-fixtures", str(tmp_path), "--count", "2", "--dims", "2,32,32,3"]) == 0
    from gvsc_sim.corefmt import read_tensor

    clip = read_tensor(tmp_path / "clip1.gvt")
    assert clip.shape == (2, 32, 32, 3)
    assert np.array_equal(clip.data, synthetic_video(1, VideoDims(2, 32, 32, 3)).data)
    assert (tmp_path / "clip0.gvt.txt").read_text().strip()
