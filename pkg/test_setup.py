"""Simple test script to verify the setup works."""

import io
import json
import os

from dotenv import load_dotenv

from config.settings import get_setting, update_setting
from src.cli.report import csv_columns, load_schema
from src.cli.runner import build_parser, run
from src.utils.logger import get_logger
from src.utils.parallel import parallel_map, resolve_threads, split_range

# Load environment variables
load_dotenv()


def test_settings():
    """Settings resolve from defaults and the environment."""
    assert get_setting("tool_name") == "coarse-bezout"
    assert get_setting("min_resolution") == 16
    assert get_setting("missing_key", "fallback") == "fallback"
    assert get_setting("threads") >= 1
    if os.getenv("COARSE_BEZOUT_LOG_LEVEL"):
        assert get_setting("log_level") == os.getenv("COARSE_BEZOUT_LOG_LEVEL")
    original = get_setting("contour_initial_points")
    update_setting("contour_initial_points", 128)
    assert get_setting("contour_initial_points") == 128
    update_setting("contour_initial_points", original)
    print("✅ Settings loaded")


def test_logger():
    logger = get_logger()
    assert logger is get_logger()
    assert logger._format_message("Counted", zeta=4, res=128) == "Counted | zeta=4 | res=128"
    assert logger._format_message("Bracket", delta=0.1, top=float("inf"), ok=True) == "Bracket | delta=0.1 | top=inf | ok=true"
    with logger.timed("setup-check"):
        pass
    logger.info("Setup check", component="logger")
    print("✅ Logger ready, context rendered as key=value")


def test_schema():
    schema = load_schema()
    assert schema["schema_version"] == 1
    for verb in ("count", "tau", "barcode", "mu", "bezout-bound", "cs-verify", "stability"):
        assert csv_columns(verb)
    print("✅ Report schema has a table for every verb")


def test_parallel_helpers():
    assert resolve_threads(3) == 3 and resolve_threads(0) == 1
    assert parallel_map(lambda x: x * x, range(10), threads=4) == [x * x for x in range(10)]
    parts = split_range(10, 3)
    assert [(p.start, p.stop) for p in parts] == [(0, 3), (3, 6), (6, 10)]
    print("✅ Thread pool keeps input order")


def test_cli_wiring():
    """Every verb is registered and a tiny run goes end to end."""
    parser = build_parser()
    args = parser.parse_args(["mu", "--r", "2"])
    assert args.command == "mu" and args.map_spec == "builtin:exp_shift"

    out = io.StringIO()
    code = run(["mu", "--map", "builtin:polynomial", "--coeffs", "1", "--r", "1", "--budget", "8"], stdout=out)
    assert code == 0
    report = json.loads(out.getvalue())
    assert report["result"]["log2_mu_lower"] == 0.0
    print("✅ mu of the constant 1 is 1")


if __name__ == "__main__":
    print("🔧 Testing coarse-bezout setup...")
    for check in (test_settings, test_logger, test_schema, test_parallel_helpers, test_cli_wiring):
        print("=" * 50)
        print(check.__doc__.strip() if check.__doc__ else check.__name__)
        print("=" * 50)
        check()
        print()
    print("🎉 Setup test completed successfully!")
    print("You can now run: python main.py count --map builtin:exp_shift --r 10 --delta 0.5")
