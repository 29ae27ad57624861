"""Smoke test for the Python extension.

Build and install it first:

    pip install --no-build-isolation ./crates/python
"""

import json
import os
import tempfile

import cadfit


def main():
    print("cadfit", cadfit.__version__)
    program = cadfit.generate("easy", seed=1, index=0)
    ops = json.loads(program)["ops"]
    assert 1 <= len(ops) <= 2, ops

    script = cadfit.emit_script(program)
    assert "extrude" in script or "revolve" in script

    with tempfile.TemporaryDirectory() as tmp:
        stl = os.path.join(tmp, "part.stl")
        assert cadfit.tessellate(program, stl) > 0

        fitted, report = cadfit.reconstruct(stl, seed=0)
        report = json.loads(report)
        assert json.loads(fitted)["ops"], "empty reconstruction"
        assert report["iou"] >= 0.9, report["iou"]

        pred = os.path.join(tmp, "pred.json")
        with open(pred, "w") as f:
            f.write(fitted)
        metrics = json.loads(cadfit.evaluate(pred, stl))
        assert not metrics["invalid"]
        assert metrics["iou"] >= 0.9, metrics

        try:
            cadfit.reconstruct(os.path.join(tmp, "missing.stl"))
        except OSError:
            pass
        else:
            raise AssertionError("missing file should raise OSError")

    print("reconstruct iou %.4f, eval iou %.4f, cd %.4f" % (report["iou"], metrics["iou"], metrics["cd"]))
    print("ok")


if __name__ == "__main__":
    main()
