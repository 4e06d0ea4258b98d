//! Local Clifford equivalence between ν singlets and a graph state, over GF(2).

use tsirelson::stabilizer::{expected_signs, pipeline_summary, verify_transform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = verify_transform(2)?;
    println!("E =\n{}F =\n{}L =\n{}R =\n{}", t.e.to_text(), t.f.to_text(), t.l.to_text(), t.r.to_text());
    for nu in 1..=5 {
        let s = pipeline_summary(nu)?;
        println!(
            "ν = {nu}: L symplectic {}, R invertible {}, signs {:?} (expected {:?}), residual {:.1e}",
            s.l_symplectic,
            s.r_invertible,
            s.signs_z_form,
            expected_signs(nu),
            s.max_eigen_residual
        );
    }
    Ok(())
}
