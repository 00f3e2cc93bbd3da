"""Write the shipped scenario presets to ``configs/`` as JSON."""

import json
from pathlib import Path

from geoadapt.scenario import flip_doc, hover_doc, large_error_doc, lissajous_doc

OUT = Path(__file__).resolve().parent.parent / "configs"


def main():
    OUT.mkdir(exist_ok=True)
    docs = {
        "flip.json": flip_doc(True),
        "flip_no_adapt.json": flip_doc(False),
        "lissajous.json": lissajous_doc(),
        "large_error.json": large_error_doc(),
        "hover.json": hover_doc(),
    }
    for name, doc in docs.items():
        (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")
        print(OUT / name)


if __name__ == "__main__":
    main()
