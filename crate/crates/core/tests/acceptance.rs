//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use qnl_core::oracle::{brute_force_min, random_saturating_triad, OracleConfig};
use qnl_core::{
    commutator_check, dql, fdt_psd, feedback_equivalent_gauge, gauge_transform, apply_feedback,
    optimal_spin_response, optimize_fixed_backaction, optimize_fixed_eff_backaction, phase_transition_probe,
    qcrb_lossless, qcrb_simple, sigma, spin_figure_point, spin_triad, sum_noise_psd, threshold_eff, threshold_full,
    uncertainty_slack, matched_sum_noise, BackAction, GaugeKernel, NoiseTriad, PhysConstants, Regime,
    SpinMeterParams, SpinResponse, Susceptibility, ThermalModel, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.abs().max(f64::MIN_POSITIVE)
}

struct Lossy {
    chi_inv: C64,
    k: BackAction<f64>,
    s_ff: f64,
    hbar: f64,
    thr: f64,
}

/// Lossy probe with random dynamic back action and an `S_FF` spread over
/// both sides of the threshold; every tenth draw sits exactly on it.
fn lossy_instance(r: &mut ChaCha8Rng, i: usize) -> Lossy {
    let hbar = r.gen_range(0.3..3.0);
    let chi_inv = C64::new(r.gen_range(-2.0..2.0), -r.gen_range(0.01..1.0));
    let k = BackAction::new(r.gen_range(-1.0..1.0), r.gen_range(-0.5..0.5));
    let thr = threshold_full(chi_inv, k, hbar).unwrap();
    let s = if i % 10 == 0 { thr } else { thr * 10f64.powf(r.gen_range(-1.5..1.5)) };
    Lossy { chi_inv, k, s_ff: s.max(hbar * k.0.im.abs()), hbar, thr }
}

fn criterion_1() -> Outcome {
    let mut r = rng(1);
    let (mut floor_gap, mut pin_err) = (f64::INFINITY, 0.0f64);
    let (mut above, mut below) = (0, 0);
    for i in 0..200 {
        let p = lossy_instance(&mut r, i);
        let o = optimize_fixed_backaction(p.chi_inv, p.k, p.s_ff, true, p.hbar).unwrap();
        let dql = p.hbar * p.chi_inv.im.abs();
        floor_gap = floor_gap.min(o.s_sum - dql);
        if p.s_ff >= p.thr {
            above += 1;
            pin_err = pin_err.max(rel(o.s_sum, dql, dql));
            if o.regime != Regime::DqlLimited {
                return outcome(false, format!("instance {i} above threshold tagged {:?}", o.regime));
            }
        } else {
            below += 1;
        }
    }
    outcome(
        floor_gap >= -1e-12 && pin_err <= 1e-10 && above > 0 && below > 0,
        format!("min(s_sum - dql) = {floor_gap:.3e} (>= -1e-12), max rel at/above threshold = {pin_err:.3e} (<= 1e-10), {above} above / {below} below"),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let cfg = OracleConfig::default();
    let (mut worst, mut undercut, mut slowest) = (0.0f64, 0.0f64, 0.0f64);
    let (mut above, mut below) = (0, 0);
    for i in 0..100 {
        let p = lossy_instance(&mut r, i);
        if p.s_ff >= p.thr { above += 1 } else { below += 1 }
        let exact = optimize_fixed_backaction(p.chi_inv, p.k, p.s_ff, true, p.hbar).unwrap().s_sum;
        let t0 = Instant::now();
        let o = brute_force_min(p.chi_inv, p.k, p.s_ff, &cfg, p.hbar).unwrap();
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        worst = worst.max(rel(o.s_sum_min, exact, exact));
        undercut = undercut.max((exact - o.s_sum_min) / exact);
        if uncertainty_slack(&o.argmin_triad, p.k, p.hbar) < -1e-12 {
            return outcome(false, format!("instance {i}: infeasible oracle argmin, slack {:e}, triad {:?}, k {:?}, s_ff {}, hbar {}", uncertainty_slack(&o.argmin_triad, p.k, p.hbar), o.argmin_triad, p.k, p.s_ff, p.hbar));
        }
    }
    outcome(
        worst <= 1e-3 && undercut <= 1e-3 && slowest <= 0.3 && above > 0 && below > 0,
        format!("max rel = {worst:.3e}, max undercut = {undercut:.3e} (<= 1e-3), slowest = {slowest:.3}s (<= 0.3s), {above} above / {below} below"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let (mut e0, mut e1) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let hbar = r.gen_range(0.3..3.0);
        let chi_inv = C64::new(r.gen_range(-3.0..3.0), 0.0);
        let s = r.gen_range(0.05..5.0);
        let kr = r.gen_range(-1.0..1.0);
        let k0 = BackAction::new(kr, 0.0);
        e0 = e0.max(rel(qcrb_lossless(chi_inv, k0, s, hbar).unwrap(), qcrb_simple(chi_inv, k0, s, hbar).unwrap(), 1.0)
            / qcrb_simple(chi_inv, k0, s, hbar).unwrap().max(f64::MIN_POSITIVE));
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let kmax = BackAction::new(kr, sign * s / hbar);
        // S_FF exactly on the FDT bound
        let s = hbar * kmax.0.im.abs();
        let simple = qcrb_simple(chi_inv, kmax, s, hbar).unwrap();
        e1 = e1.max(rel(qcrb_lossless(chi_inv, kmax, s, hbar).unwrap(), 2.0 * simple, 2.0 * simple));
    }
    outcome(e0 <= 1e-12 && e1 <= 1e-12, format!("Im K = 0: max rel {e0:.3e}; ħ|Im K| = S_FF: max rel to 2x {e1:.3e} (<= 1e-12)"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let (mut e_sum, mut e_slack, mut e_sigma, mut e_fb) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut bit_mismatch = 0;
    for i in 0..500 {
        let hbar: f64 = r.gen_range(0.3..3.0);
        let k: BackAction<f64> = BackAction::new(r.gen_range(-1.0..1.0), r.gen_range(-0.5..0.5));
        let s_ff = hbar * k.0.im.abs() + r.gen_range(0.01..3.0);
        let mut t = random_saturating_triad(k, s_ff, i as u64, hbar).unwrap();
        if i % 2 == 1 {
            t.s_xx *= 1.0 + r.gen_range(0.0..2.0);
        }
        let chi_inv = C64::new(r.gen_range(-2.0..2.0), -r.gen_range(0.0..1.0));
        let g = GaugeKernel::new(C64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)));
        let m = gauge_transform(&t, k, &g);
        let t2 = m.triad;
        let d = k.0 - g.value();

        let kk = chi_inv + k.0;
        let sum_scale = kk.norm_sqr() * t.s_xx + 2.0 * kk.norm() * t.s_xf.norm() + t.s_ff;
        e_sum = e_sum.max(rel(sum_noise_psd(&t, chi_inv, k), sum_noise_psd(&t2, chi_inv, m.back_action), sum_scale));
        let slack_scale = t.s_xx * t.s_ff + t.s_xf.norm_sqr() + t2.s_xx * t2.s_ff + t2.s_xf.norm_sqr()
            + d.norm_sqr() * t.s_xx * t.s_xx + hbar * hbar;
        e_slack = e_slack.max(rel(uncertainty_slack(&t, k, hbar), uncertainty_slack(&t2, m.back_action, hbar), slack_scale));
        let sig_scale = k.0.im.abs() * t.s_xx + t.s_xf.norm() + d.norm() * t.s_xx;
        e_sigma = e_sigma.max(rel(sigma(&t, k), sigma(&t2, m.back_action), sig_scale));

        let kappa = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        let composed = gauge_transform(&t, k, &feedback_equivalent_gauge(k, kappa));
        let direct = gauge_transform(&t, k, &GaugeKernel::new(k.0 - kappa));
        if !bits_equal(&composed.triad, &direct.triad) || composed.back_action.0 != direct.back_action.0 {
            bit_mismatch += 1;
        }
        let physical = apply_feedback(&t, k, kappa);
        let fb_scale = t.s_ff + kappa.norm_sqr() * t.s_xx + 2.0 * kappa.norm() * t.s_xf.norm();
        e_fb = e_fb
            .max(rel(physical.triad.s_ff, direct.triad.s_ff, fb_scale))
            .max(rel(physical.triad.s_xf.re, direct.triad.s_xf.re, t.s_xf.norm() + kappa.norm() * t.s_xx))
            .max(rel(physical.triad.s_xf.im, direct.triad.s_xf.im, t.s_xf.norm() + kappa.norm() * t.s_xx));
    }
    outcome(
        e_sum <= 1e-12 && e_slack <= 1e-12 && e_sigma <= 1e-12 && bit_mismatch == 0 && e_fb <= 1e-12,
        format!(
            "sum {e_sum:.2e}, slack {e_slack:.2e}, sigma {e_sigma:.2e} (<= 1e-12); feedback gauge vs direct: {bit_mismatch} bit mismatches; physical loop vs gauge {e_fb:.2e}"
        ),
    )
}

fn bits_equal(a: &NoiseTriad<f64>, b: &NoiseTriad<f64>) -> bool {
    a.s_xx.to_bits() == b.s_xx.to_bits()
        && a.s_xf.re.to_bits() == b.s_xf.re.to_bits()
        && a.s_xf.im.to_bits() == b.s_xf.im.to_bits()
        && a.s_ff.to_bits() == b.s_ff.to_bits()
}

fn criterion_5() -> Outcome {
    let chi_inv = C64::new(0.0, -0.2);
    let thr = threshold_eff(chi_inv, &GaugeKernel::real(0.0), 1.0).unwrap();
    let h = 1e-4 * thr;
    let full = phase_transition_probe(chi_inv, BackAction::zero(), 1.0, h, true).unwrap();
    let zero = phase_transition_probe(chi_inv, BackAction::zero(), 1.0, h, false).unwrap();
    let ok_full = (full.d2_below - 20.0).abs() <= 0.02 * 20.0
        && full.d2_above.abs() <= 1e-6
        && (full.d1_below - full.d1_above).abs() <= 1e-6;
    let ok_zero = (zero.d2_below - zero.d2_above).abs() <= 0.02 * zero.d2_below.abs()
        && (zero.d1_below - zero.d1_above).abs() <= 1e-6
        && zero.d1_jump.abs() <= 1e-6;
    outcome(
        ok_full && ok_zero && thr == full.threshold,
        format!(
            "thr = {thr}; d2 below {:.4} above {:.1e}; |Δd1| {:.1e}; Im S_xF slope jump {:.3}; sigma-zero d2 {:.4}/{:.4}, slope jump {:.1e}",
            full.d2_below,
            full.d2_above,
            (full.d1_below - full.d1_above).abs(),
            full.d1_jump,
            zero.d2_below,
            zero.d2_above,
            zero.d1_jump
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut sat = 0.0f64;
    for _ in 0..200 {
        let hbar = r.gen_range(0.3..3.0);
        let theta_i = 10f64.powf(r.gen_range(-1.0..1.0));
        let theta_s = r.gen_range(0.0..3.0);
        let chi_s = C64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let p = SpinMeterParams::new(theta_i, theta_s, SpinResponse::Fixed(chi_s)).unwrap();
        let t = spin_triad(&p, 1.0, hbar).unwrap();
        let lhs = t.s_xx * t.s_ff - t.s_xf.norm_sqr();
        let resid = lhs - hbar * hbar * theta_s * chi_s.im.abs() - hbar * hbar / 4.0;
        sat = sat.max(resid.abs() / (1.0 + t.s_xx * t.s_ff));
    }

    let mut dominance_violations = 0;
    let mut reproduce = 0.0f64;
    let mut branches = [0usize; 2];
    for (chi_inv, hbar) in [(C64::new(0.0, -0.2), 1.0), (C64::new(0.3, -0.2), 1.0), (C64::new(-1.1, -0.05), 0.7)] {
        let chi = chi_inv.inv();
        for i in 0..100 {
            let theta_i = 10f64.powf(-3.0 + 6.0 * i as f64 / 99.0);
            let s = hbar * theta_i;
            let opt = optimize_fixed_eff_backaction(chi_inv, &GaugeKernel::real(0.0), s, hbar).unwrap().s_sum;
            if matched_sum_noise(theta_i, chi_inv, hbar).unwrap() < opt {
                dominance_violations += 1;
            }
            let resp = optimal_spin_response(theta_i, chi);
            branches[usize::from(theta_i * chi.im.abs() >= 0.5)] += 1;
            let p = SpinMeterParams::new(theta_i, 1.0, SpinResponse::Fixed(resp)).unwrap();
            let t = spin_triad(&p, 1.0, hbar).unwrap();
            reproduce = reproduce.max(rel(sum_noise_psd(&t, chi_inv, BackAction::zero()), opt, opt));
        }
    }
    outcome(
        sat <= 1e-12 && dominance_violations == 0 && reproduce <= 1e-10 && branches.iter().all(|&b| b > 0),
        format!(
            "saturation residual {sat:.2e} (<= 1e-12); matched < optimum at {dominance_violations} of 300 sweep points; optimal response rel {reproduce:.2e} (<= 1e-10) over {}/{} points per branch",
            branches[0], branches[1]
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let hbar = r.gen_range(0.3..3.0);
        let chi_inv = C64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let k = BackAction::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        worst = worst.max(commutator_check(chi_inv, k, hbar).residual.abs());
    }
    outcome(worst <= 1e-14, format!("max |residual| = {worst:.2e} (<= 1e-14) over 1000 draws"))
}

fn criterion_8() -> Outcome {
    let chi_inv = C64::new(0.0, -0.2);
    let hbar = 1.0;
    let thr = threshold_eff(chi_inv, &GaugeKernel::real(0.0), hbar).unwrap();
    let dql = hbar * chi_inv.im.abs();
    // same log grid as `spin-figure` with start 0.01, stop 100, 201 points
    let n = 201;
    let rows: Vec<_> = (0..n)
        .map(|i| {
            let x = 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64);
            spin_figure_point(chi_inv, x * thr, hbar).unwrap()
        })
        .collect();
    let at_thr = (n - 1) / 2;

    let full_le_zero = rows.iter().all(|p| p.full <= p.sigma_zero);
    let first_chain_break = rows.iter().find(|p| p.sigma_zero > p.spin_matched).map(|p| p.s_ff / thr);
    let chain_breaks = rows.iter().filter(|p| !(p.full <= p.sigma_zero && p.sigma_zero <= p.spin_matched)).count();
    let chain = full_le_zero && chain_breaks == 0;

    let flat = rows.iter().filter(|p| p.s_ff >= thr).all(|p| rel(p.full, dql, dql) <= 1e-12);

    let (argmin, min) = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.sigma_zero.total_cmp(&b.1.sigma_zero))
        .map(|(i, p)| (i, p.sigma_zero))
        .unwrap();
    let unique = rows.iter().enumerate().all(|(i, p)| i == argmin || p.sigma_zero > min);
    let min_ok = argmin == at_thr && unique && rows[at_thr].s_ff == thr && rel(min, dql, dql) <= 1e-10;

    let upper = &rows[at_thr..];
    let matched_down = upper.windows(2).all(|w| w[1].spin_matched < w[0].spin_matched);
    let zero_up = upper.windows(2).all(|w| w[1].sigma_zero > w[0].sigma_zero);
    let last = rows[n - 1];
    let limits = last.full == dql
        && matched_down
        && rel(last.spin_matched, dql, dql) <= 1e-2
        && zero_up
        && last.sigma_zero > 10.0 * dql;

    let ok = chain && flat && min_ok && limits;
    outcome(
        ok,
        format!(
            "ordering full <= sigma-zero <= spin-matched: {} ({chain_breaks} of {n} points violate, first at S = {} S_thr0); full = DQL above threshold: {flat}; sigma-zero unique min at S_thr0 = DQL: {min_ok}; full/matched -> DQL, sigma-zero diverges: {limits}",
            if chain { "holds" } else { "violated" },
            first_chain_break.map_or("-".to_string(), |x| format!("{x:.4}")),
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let consts = PhysConstants::natural();
    let mut mismatches = 0;
    let mut monotone_breaks = 0;
    let ladder = [0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0, 1000.0];
    for i in 0..1000 {
        let model = match i % 3 {
            0 => Susceptibility::damped_oscillator(r.gen_range(0.1..10.0), r.gen_range(0.0..3.0), r.gen_range(0.0..1.0)),
            1 => Susceptibility::free_mass(r.gen_range(0.1..10.0), r.gen_range(0.0..1.0)),
            _ => {
                let omega: Vec<f64> = (1..=8).map(|j| j as f64 * 0.5).collect();
                let values = omega.iter().map(|_| C64::new(r.gen_range(-2.0..2.0), -r.gen_range(0.0..1.0))).collect();
                Susceptibility::tabulated(omega, values)
            }
        }
        .unwrap();
        let omega = r.gen_range(0.5..4.0);
        let floor = dql(&model, consts.hbar, omega).unwrap();
        if fdt_psd(&model, &ThermalModel::Zero, &consts, omega).unwrap() != floor
            || fdt_psd(&model, &ThermalModel::uniform(0.0).unwrap(), &consts, omega).unwrap() != floor
        {
            mismatches += 1;
        }
        let series: Vec<f64> = ladder
            .iter()
            .map(|&t| fdt_psd(&model, &ThermalModel::uniform(t).unwrap(), &consts, omega).unwrap())
            .collect();
        if series.windows(2).any(|w| w[1] < w[0]) || (floor > 0.0 && series[9] <= series[0]) {
            monotone_breaks += 1;
        }
    }
    outcome(
        mismatches == 0 && monotone_breaks == 0,
        format!("T = 0 not bit-equal to DQL at {mismatches} of 1000 points; non-monotone ladders: {monotone_breaks}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("DQL floor and saturation", criterion_1),
        ("oracle equivalence", criterion_2),
        ("QCRB endpoints", criterion_3),
        ("gauge and feedback invariance", criterion_4),
        ("phase transition", criterion_5),
        ("spin-meter identities", criterion_6),
        ("commutator cancellation", criterion_7),
        ("spin figure structure", criterion_8),
        ("FDT consistency", criterion_9),
    ];
    let started = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !o.ok {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed in {:.2}s", criteria.len() - failed, started.elapsed().as_secs_f64());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
