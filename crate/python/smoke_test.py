"""Smoke test for the depmap extension.

Uses an installed `depmap` if present, otherwise loads the library built by
`cargo build -p depmap-py --features extension-module --release`.
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load():
    try:
        import depmap

        return depmap
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libdepmap.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("depmap", str(lib))
            spec = importlib.util.spec_from_file_location("depmap", lib, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("depmap extension not found; build it with cargo first")


def main():
    depmap = load()

    script = 'd = pd.read_csv("t.csv")\nm.fit(d[["a", "b"]])\n'
    analysis = json.loads(depmap.analyze_script(script))
    assert analysis["has_sink"] is True, analysis
    assert "t.csv" in json.dumps(analysis["mapping"]), analysis

    report = json.loads(depmap.analyze(str(ROOT / "fixtures" / "motivating"), filter="A2", generated_at=1_700_000_000))
    assert report["generated_at"] == "2023-11-14T22:13:20Z", report
    (model,) = report["models"]
    assert [s["symbol"] for s in model["sources"]] == ["file2.csv", "table1", "table2"], model

    try:
        depmap.analyze("/nonexistent/repo")
    except ValueError:
        pass
    else:
        raise AssertionError("missing repository should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
