"""Write the gallery scenarios to scenarios/*.scenario in canonical form.

    python scripts/make_gallery_configs.py [outdir]
"""

import sys
from pathlib import Path

from bpmsr import gallery
from bpmsr.config import dump_scenario
from bpmsr.percolation import AlwaysOne, RandomMonotone

SCENARIOS = {
    "alternating": gallery.alternating_scenario(),
    "three_periodic_zero": gallery.three_periodic_scenario(name="three_periodic_zero"),
    "three_periodic_one": gallery.three_periodic_scenario(AlwaysOne(), name="three_periodic_one"),
    "three_periodic_random": gallery.three_periodic_scenario(
        RandomMonotone(), name="three_periodic_random"),
    "tracking": gallery.tracking_scenario(),
    "full_consensus": gallery.full_consensus_scenario(),
}


def main(outdir="scenarios"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, s in SCENARIOS.items():
        path = out / f"{name}.scenario"
        path.write_text(f"# gallery scenario '{name}'; regenerate with "
                        f"scripts/make_gallery_configs.py\n" + dump_scenario(s))
        print(path)


if __name__ == "__main__":
    main(*sys.argv[1:])
