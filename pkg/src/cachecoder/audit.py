"""Empirical security audit of a delivery log.

The information-leakage guarantee rests on one-time-pad discipline, so
the audit checks what is checkable at the desk:

* structural: every block carries a key term and no key stream is used
  twice anywhere in the log;
* mask: the key term actually reaches the eavesdropper's observation
  (for common-mask schemes the all-ones combining scalar h_e^T 1 must
  be nonzero; stacked-key schemes need h_e != 0 and distinct per-row
  streams);
* statistical: the delivery is replayed with fixed files, channel and
  coefficients but freshly drawn keys, and a chi-square test checks
  that every eavesdropped symbol position is uniform over the field.

Failures are verdicts, not exceptions.
"""

from dataclasses import dataclass, field

from .schemes import MODULES, SchemeRun

COMMON_MASK_SCHEMES = {"mt", "decentralized"}


@dataclass
class AuditReport:
    structural_ok: bool
    mask_present: bool
    uniformity_pvalue: float | None
    trials: int
    positions: int = 0
    issues: list = field(default_factory=list)

    def passed(self, p_threshold: float = 0.01) -> bool:
        if not (self.structural_ok and self.mask_present):
            return False
        if self.uniformity_pvalue is None:
            return self.trials == 0
        return self.uniformity_pvalue > p_threshold


def structural_check(log) -> tuple[bool, list]:
    """One-time-pad discipline: a key term in every block, no reuse."""
    issues = []
    seen = {}
    for idx, block in enumerate(log.blocks):
        if not block.key_ids:
            issues.append(f"block {idx} (subset {block.subset}) has no key term")
        for key_id in block.key_ids:
            if key_id in seen:
                issues.append(
                    f"key reuse: {key_id} in blocks {seen[key_id]} and {idx}"
                )
            else:
                seen[key_id] = idx
    return not issues, issues


def mask_check(scheme: str, log, channel) -> tuple[bool, list]:
    issues = []
    if all(v == 0 for v in channel.h_e):
        issues.append("eavesdropper channel is all-zero")
    if scheme in COMMON_MASK_SCHEMES:
        mask = 0
        for v in channel.h_e:
            mask ^= v
        if mask == 0:
            issues.append(
                "h_e^T 1 = 0: the shared key mask vanishes at the eavesdropper"
            )
    else:
        for idx, block in enumerate(log.blocks):
            if len(set(block.key_ids)) != len(block.key_ids):
                issues.append(f"block {idx} stacks a repeated key stream")
    return not issues, issues


def security_audit(run: SchemeRun, trials: int, ablate_keys: bool = False,
                   log=None) -> AuditReport:
    """Audit a completed run; `trials` replays drive the uniformity test.

    Pass `log` to audit a doctored log in place of the run's own.
    Replays share nothing mutable, so trials could execute concurrently;
    they are run serially here to keep the report deterministic anyway.
    """
    log = run.log if log is None else log
    structural_ok, issues = structural_check(log)
    mask_ok, mask_issues = mask_check(run.scheme, log, run.channel)
    issues = issues + mask_issues

    pvalue = None
    positions = 0
    if structural_ok and trials > 0:
        pvalue, positions = _uniformity_pvalue(run, trials, ablate_keys)

    return AuditReport(
        structural_ok=structural_ok,
        mask_present=mask_ok,
        uniformity_pvalue=pvalue,
        trials=trials,
        positions=positions,
        issues=issues,
    )


def _uniformity_pvalue(run: SchemeRun, trials: int, ablate_keys: bool):
    """Chi-square of eavesdropped symbols over key re-draws.

    Per-position statistics are summed (independent under the uniform
    hypothesis), giving one p-value with positions*(q-1) degrees of
    freedom.
    """
    from scipy.stats import chi2

    mod = MODULES[run.scheme]
    params = run.params
    q = params.field.q
    counts = None
    for trial in range(trials):
        placement = mod.place(params, run.library,
                              key_seed=(run.key_seed, "audit", trial))
        log = mod.deliver(params, run.library, placement, run.demand,
                          run.channel, run.coef_seed, ablate_keys=ablate_keys)
        observed = []
        for block in log.blocks:
            observed.extend(run.channel.eavesdrop(block.rows))
        if counts is None:
            counts = [[0] * q for _ in range(len(observed))]
        for pos, sym in enumerate(observed):
            counts[pos][sym] += 1

    positions = len(counts) if counts else 0
    if positions == 0:
        return 1.0, 0
    expected = trials / q
    stat = 0.0
    for pos_counts in counts:
        for c in pos_counts:
            diff = c - expected
            stat += diff * diff / expected
    dof = positions * (q - 1)
    return float(chi2.sf(stat, dof)), positions
