"""Builds the extension module and exercises it end to end.

Run from the repository root:  python3 python/smoke_test.py
"""

import json
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build(dest: Path) -> None:
    subprocess.run(["cargo", "build", "--release", "-p", "chiwalk-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libchiwalk.so"
    if not lib.exists():
        lib = ROOT / "target" / "release" / "libchiwalk.dylib"
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy(lib, dest / f"chiwalk{suffix}")


def main() -> int:
    tmp = Path(tempfile.mkdtemp())
    build(tmp)
    sys.path.insert(0, str(tmp))
    import chiwalk

    scenario = json.loads(chiwalk.scenario_json("builtin:grid100", 1))
    assert len(scenario["floor"]["aps"]) == 100, "grid100 should have 100 APs"

    assert abs(chiwalk.expense(1000.0, "chi") - (0.1 * 1000 + 36)) < 1e-9
    assert chiwalk.expense(1000.0, "crowd:5") == 0.0
    assert abs(chiwalk.expense(1000.0, "fp:1/5,5") - (100 + 180)) < 1e-9

    rows = json.loads(chiwalk.run_eval("builtin:grid100", ["chi", "crowd:2"], 1, 500.0))
    assert {r["approach"] for r in rows} == {"chi", "crowd:2"}
    assert all(r["avg_error"] >= 0 for r in rows)

    s = chiwalk.Session("builtin:office17", 3)
    s.tick(json.dumps({"type": "set_objectives", "objectives": [{"kind": "locate_aps"}]}))
    for heading in (90.0, 0.0, 270.0):
        delta = json.loads(s.tick(json.dumps({"type": "walk", "heading": heading, "distance": 10.0})))
        assert delta["steps_added"] > 0
    assert json.loads(s.suggestions())["type"] == "pathway"
    try:
        s.tick(json.dumps({"type": "walk", "heading": 0.0, "distance": -1.0}))
        raise AssertionError("negative distance accepted")
    except ValueError:
        pass

    path = tmp / "session.json"
    s.save(str(path))
    back = chiwalk.Session.load(str(path))
    assert back.state() == s.state()
    assert back.seq == 4
    back.verify_replay()

    path.write_text(path.read_text()[:100])
    try:
        chiwalk.Session.load(str(path))
        raise AssertionError("truncated file loaded")
    except ValueError:
        pass

    print("python smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
