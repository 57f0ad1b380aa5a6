//! Builds the base constellations, reshapes them and prints their moments
//! and amplitude structure. Writes one exchange file to the temp directory.
//!
//! cargo run --release --example constellation_basics

use shapeopt::constellation::{
    amplitude_classes, build_product_pam16_4d, build_product_qam, mb_pmf, md_ball, moments, read_constellation,
    write_constellation, Constellation4D, ENERGY_REL_TOL,
};

fn show(label: &str, c: &Constellation4D) {
    let m = moments(c);
    let acs = amplitude_classes(c, ENERGY_REL_TOL);
    println!(
        "{label:<22} {:>6} {:>6} {:>4} {:8.4} {:6.3} {:6.3} {:6.3}",
        c.len(),
        c.support_size(),
        acs.nonzero_classes(),
        m.entropy_bits,
        m.papr,
        m.mu4,
        m.mean_energy
    );
}

fn main() -> shapeopt::Result<()> {
    let qam16 = build_product_qam(16)?;
    let qam64 = build_product_qam(64)?;
    let pam16 = build_product_pam16_4d();
    println!("{:<22} {:>6} {:>6} {:>4} {:>8} {:>6} {:>6} {:>6}", "", "N", "supp", "amp", "H[bit]", "PAPR", "mu4", "E");
    show("16QAM^2", &qam16);
    show("64QAM^2", &qam64);
    show("4D 16PAM", &pam16);
    for lambda in [-1.0, 1.0, 3.0] {
        show(&format!("64QAM^2 MB l={lambda}"), &mb_pmf(&qam64, lambda)?);
    }
    for n in [256, 1024, 4096] {
        show(&format!("MD ball {n}"), &md_ball(&pam16, n)?);
    }

    let path = std::env::temp_dir().join("mb64.json");
    let c = mb_pmf(&qam64, 2.0)?.with_name("64QAM^2 MB");
    write_constellation(&path, &c)?;
    assert_eq!(read_constellation(&path)?, c);
    println!("wrote {}", path.display());
    Ok(())
}
