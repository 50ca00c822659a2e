"""Security audit: one-time-pad discipline, mask reachability, and the
chi-square uniformity surrogate on a small field."""

import copy
from fractions import Fraction

from cachecoder.audit import mask_check, security_audit, structural_check
from cachecoder.schemes import execute, make_params

AUDIT_SEED = 1  # chosen so h_e^T 1 != 0 for the common-mask configs below


def small_mt_run(seed=AUDIT_SEED, m=4):
    params = make_params("mt", K=3, L=2, N=3, t=1, f=3, m=m, seed=seed)
    return execute("mt", params)


def test_honest_run_passes():
    run = small_mt_run()
    audit = security_audit(run, trials=340)
    assert audit.structural_ok
    assert audit.mask_present
    assert audit.positions == run.log.total_columns
    assert audit.uniformity_pvalue > 0.01
    assert audit.passed()


def test_ablated_keys_rejected():
    run = small_mt_run()
    audit = security_audit(run, trials=340, ablate_keys=True)
    assert audit.structural_ok  # key ids still logged, content zeroed
    assert audit.uniformity_pvalue is not None
    assert audit.uniformity_pvalue <= 0.01
    assert not audit.passed()


def test_doctored_key_reuse_flagged():
    run = small_mt_run()
    doctored = copy.deepcopy(run.log)
    doctored.blocks[1].key_ids = doctored.blocks[0].key_ids
    ok, issues = structural_check(doctored)
    assert not ok and any("key reuse" in s for s in issues)
    audit = security_audit(run, trials=0, log=doctored)
    assert not audit.structural_ok
    assert audit.uniformity_pvalue is None  # stats only run when structure holds
    assert not audit.passed()


def test_block_without_key_flagged():
    run = small_mt_run()
    doctored = copy.deepcopy(run.log)
    doctored.blocks[0].key_ids = ()
    ok, issues = structural_check(doctored)
    assert not ok and any("no key term" in s for s in issues)


def test_mask_check_stacked_schemes():
    params = make_params("grouped", K=4, L=2, N=4, t=2, f=2, m=4, seed=AUDIT_SEED)
    run = execute("grouped", params)
    ok, _ = mask_check("grouped", run.log, run.channel)
    assert ok
    doctored = copy.deepcopy(run.log)
    doctored.blocks[0].key_ids = (doctored.blocks[0].key_ids[0],) * 2
    ok, issues = mask_check("grouped", doctored, run.channel)
    assert not ok and any("repeated key stream" in s for s in issues)


def test_stacked_scheme_honest_audit():
    params = make_params("feedback", K=3, L=2, N=3, t=0, f=4, m=4, seed=AUDIT_SEED)
    run = execute("feedback", params)
    audit = security_audit(run, trials=340)
    assert audit.structural_ok and audit.mask_present
    assert audit.uniformity_pvalue > 0.01


def test_decentralized_honest_audit():
    params = make_params("decentralized", K=3, L=2, N=3, f=16,
                         cache_prob=Fraction(1, 2), m=4, seed=AUDIT_SEED)
    run = execute("decentralized", params)
    audit = security_audit(run, trials=340)
    assert audit.structural_ok and audit.mask_present
    assert audit.uniformity_pvalue > 0.01
