"""
Running the shipped probes
==========================

Each probe takes an experiment config and returns a report whose aggregates
can be recomputed from its records.  The expnew probe is the quickest; the
others take several minutes on one CPU.
"""

import sys

from horolab import config, experiments

rep = experiments.reproduce_expnew(config.load_experiment("expnew"))
print(rep.to_text()[:1500])
print("consistent:", rep.consistent())

if "--all" in sys.argv:
    for name, run in (("myr_in_horo", experiments.probe_myr_in_horo),
                      ("measure_diff", experiments.probe_measure_difference),
                      ("dimension", experiments.dimension_sweep)):
        r = run(config.load_experiment(name))
        print(name, r.aggregates, r.flags)
