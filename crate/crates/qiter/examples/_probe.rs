use qiter::qarith::QContext;
use qiter::ratfunc::{delta, parse};
use std::time::Instant;

fn main() {
    let ctx = QContext::cyclotomic(5).unwrap();
    let f = parse(&ctx, "(2*t^3-t+1)/(3*t^3+g*t^2-2)").unwrap();
    for k in [10u64, 11, 12, 13, 14, 15] {
        let t0 = Instant::now();
        let d = delta(&ctx, k, &f);
        eprintln!("delta^{k}(f): {:?} (len {})", t0.elapsed(), format!("{d}").len());
    }
    let d10 = delta(&ctx, 10, &f);
    let t0 = Instant::now();
    let dd = delta(&ctx, 3, &d10);
    eprintln!("delta^3(delta^10): {:?} (len {})", t0.elapsed(), format!("{dd}").len());
}
