"""Run every metatheorem campaign at the acceptance sizes and print a table.

    python3 scripts/run_campaigns.py --seed 7 --json > campaigns.jsonl
"""

import argparse
import json
import time

from strictness.attrs import Mode
from strictness.metatheory import GenConfig, run_campaign

SIZES = {"soundness": 1000, "lazy_soundness": 500, "strict_failure": 500, "translation": 500, "determinism": 200}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--scope", type=int, default=4)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every campaign size")
    ap.add_argument("--theorem", action="append", choices=list(SIZES))
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    failed = False
    for name in args.theorem or SIZES:
        n = max(1, int(SIZES[name] * args.scale))
        for lang in ("cbn", "cbpv"):
            if name == "translation" and lang != "cbn":
                continue
            for mode in Mode:
                cfg = GenConfig(seed=args.seed, max_depth=args.depth, max_scope=args.scope, mode=mode)
                start = time.perf_counter()
                r = run_campaign(name, lang, cfg, n)
                elapsed = time.perf_counter() - start
                failed = failed or not r.passed
                if args.json:
                    print(json.dumps({"lang": lang, "mode": mode.value, "seconds": round(elapsed, 2), **r.to_json()}))
                else:
                    print(
                        f"{name:15} {lang:4} {mode.value:8} {r.trials:5} trials {r.failures:3} failures "
                        f"{r.obligations:6} obligations {elapsed:6.1f}s"
                    )
                    if r.counterexample:
                        print(r.counterexample)
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
