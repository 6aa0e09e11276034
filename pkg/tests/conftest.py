"""Terminal summary: one pass/fail line per acceptance criterion."""

import re

CRITERIA = {
    1: "mean-field critical point",
    2: "first-order photon-number jump",
    3: "ground-quadruplet near-degeneracy",
    4: "avoided crossing of the fourth gap",
    5: "coskewness non-Gaussianity",
    6: "normal-phase coskewness scaling",
    7: "photon-statistics transition",
    8: "quadratic fluctuations vs symplectic oracle",
    9: "trajectory engine correctness",
    10: "dissipative non-Gaussianity",
    11: "frequency plan detuning and ratio",
    12: "structural invariants",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    status = {}
    for outcome, label in (("passed", True), ("failed", False), ("error", False)):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _NODE_RE.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            num = int(m.group(1))
            status[num] = status.get(num, True) and label
    if not status:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(CRITERIA):
        if num not in status:
            continue
        verdict = "PASS" if status[num] else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:02d} ({CRITERIA[num]}): {verdict}"
        )
