"""Check reports: a uniform record of one verified identity."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of one identity check.

    ``passed`` is true when abs_err <= tolerance or rel_err <= tolerance;
    both sides are recorded before comparison so failures stay diagnosable.
    """

    name: str
    params: dict
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    tolerance: float
    passed: bool
    runtime_ms: float = 0.0
    notes: str = ""

    def row(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "lhs_re": float(self.lhs.real),
            "lhs_im": float(self.lhs.imag),
            "rhs_re": float(self.rhs.real),
            "rhs_im": float(self.rhs.imag),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "runtime_ms": self.runtime_ms,
            "notes": self.notes,
        }


def make_report(name: str, params: dict, lhs, rhs, tolerance: float,
                runtime_ms: float = 0.0, notes: str = "",
                extra_err: float = 0.0) -> CheckReport:
    """Build a report from one (lhs, rhs) pair.

    ``extra_err`` is the worst *relative* error of secondary sub-identities
    run under the same check; it is folded into both error fields so the
    report only passes when every sub-identity does.
    """
    lhs = complex(lhs)
    rhs = complex(rhs)
    scale = max(abs(lhs), abs(rhs))
    abs_err = max(abs(lhs - rhs), extra_err * max(scale, 1.0))
    rel_err = max(abs_err / scale if scale > 0 else abs_err, extra_err)
    passed = (abs_err <= tolerance) or (rel_err <= tolerance)
    if extra_err > tolerance:
        passed = False
    return CheckReport(name=name, params=params, lhs=lhs, rhs=rhs,
                       abs_err=abs_err, rel_err=rel_err, tolerance=tolerance,
                       passed=passed, runtime_ms=runtime_ms, notes=notes)
