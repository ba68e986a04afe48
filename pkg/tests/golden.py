import json
from pathlib import Path

GOLDEN = json.loads((Path(__file__).parent / "fixtures" / "golden.json").read_text())
ORACLE = GOLDEN["oracles"]
NKL = GOLDEN["n_kl"]
