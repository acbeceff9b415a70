use tourncycles::rng::{IndexedRng, Seed};
use tourncycles::spectrum::{self, SpectrumInstance};

fn main() {
    let seed = Seed(0xC3C4);
    let rng = IndexedRng::new(Seed(seed.0 ^ 0x0B71));
    for i in 0..50u64 {
        let s3 = 1.0 / 72.0 + (0.125 - 1.0 / 72.0) * rng.unit(2 * i);
        let rmin = spectrum::rho_min(s3).unwrap();
        let rho = rmin + (0.49 - rmin).max(0.0) * rng.unit(2 * i + 1);
        let inst = SpectrumInstance::with_default_caps(s3, rho).unwrap();
        let structured = spectrum::solve_structured(&inst).unwrap();
        let k = structured.witness.reals.len().saturating_sub(1).max(1);
        let l = structured.witness.pairs.len();
        match spectrum::solve_numeric(&inst, k, l, Seed(seed.0 ^ (0x9000 + i)), 64) {
            Ok(sol) => {
                let gap = (structured.value - sol.value).abs();
                if gap > 1e-6 {
                    println!("i={i} s3={s3:.6} rho={rho:.6} k={k} l={l} structured={:.9} numeric={:.9} GAP {gap:.3e} tag {}", structured.value, sol.value, structured.case_tag);
                }
            }
            Err(e) => println!("i={i} s3={s3:.6} rho={rho:.6} k={k} l={l} structured={:.9} tag {} ERR {e}", structured.value, structured.case_tag),
        }
    }
    println!("done");
}
