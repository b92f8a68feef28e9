"""The whole bundled corpus in every mode, as the CLI's ``run`` would do it."""

import sys

from ghostsym.harness import CampaignConfig, run_campaign


def main(out=None):
    cfg = CampaignConfig(programs=("corpus",), modes=("baseline", "baseline-lazy", "ghost"),
                         budget=60.0, output=out)
    report = run_campaign(cfg)
    print(report.table())
    for mode, t in report.totals().items():
        print(f"{mode}: {t['bombs_triggered']}/{t['bombs']} bombs, {t['rejected']} rejected replays")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
