"""Print the gain-condition report for the default vehicle and gains."""

import math

from geoadapt.ctrl import ControlGains
from geoadapt.gains import DomainConstants, check_attitude_gains, check_position_gains
from geoadapt.model import QuadParams


def show(title, report):
    print(title)
    for c in report.conditions:
        mark = "ok  " if c.passed else "FAIL"
        print(f"  {mark} {c.name:24s} lhs={c.lhs:.6g} rhs={c.rhs:.6g}")


def main():
    p, g = QuadParams(), ControlGains()
    att = check_attitude_gains(p, g, 4 * math.pi)
    show("attitude", att)
    print(f"  c_2 ceiling = {att.values['c2_ceiling']:.6f}")
    for psi_1 in (0.9, 0.1, 0.01):
        show(f"position, psi_1 = {psi_1}", check_position_gains(p, g, DomainConstants(psi_1=psi_1)))


if __name__ == "__main__":
    main()
