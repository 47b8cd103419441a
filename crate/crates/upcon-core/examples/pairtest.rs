// Quick diagnostic: same-pulse pair census at the source.
use upcon_core::emitter::{generate_emission, EmitterParams};
use upcon_core::events::Origin;

fn main() {
    let params = EmitterParams { target_flux_fiber_hz: 1e5, pulse_width_ps: 0.0, ..EmitterParams::default() };
    let dur = 60.0;
    let s = generate_emission(&params, dur, 12345).unwrap();
    let period = params.period_ps();
    let n_pulses = (dur * params.rep_rate_hz) as f64;
    let mut qd_unc = 0u64;
    let mut unc_unc = 0u64;
    let mut qd_qd = 0u64;
    let ev = s.events();
    for w in ev.windows(8) {
        let w0 = &w[0];
        for e in &w[1..] {
            if e.time / period == w0.time / period {
                match (w0.origin, e.origin) {
                    (Origin::Qd, Origin::Qd) => qd_qd += 1,
                    (Origin::Uncorrelated, Origin::Uncorrelated) => unc_unc += 1,
                    _ => qd_unc += 1,
                }
            } else { break; }
        }
    }
    let q = params.qd_mean_per_pulse();
    let u = params.uncorr_mean_per_pulse();
    println!("events: {} (rate {:.1}/s)", ev.len(), ev.len() as f64 / dur);
    println!("qd-unc pairs: {} expected {:.0}", qd_unc, n_pulses * 2.0 * q * u / 2.0 * 2.0);
    println!("unc-unc pairs: {} expected {:.0}", unc_unc, n_pulses * u * u / 2.0);
    println!("qd-qd pairs: {} expected 0", qd_qd);
    let c0_pairs = qd_unc + unc_unc;
    let expected = n_pulses * (2.0 * q * u + u * u) / 2.0;
    println!("total same-pulse pairs: {} expected {:.0} (ratio {:.3})", c0_pairs, expected, c0_pairs as f64 / expected);
}
