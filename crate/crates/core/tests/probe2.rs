use corrmac_core::model::*;
use corrmac_core::precoding::*;
use std::time::Instant;

#[test]
fn probe_nusvd_iters() {
    let scn = Scenario::with_common_snr_db(10, 2, 10, 0.99, 0.0).unwrap();
    let mut total = 0usize;
    let t0 = Instant::now();
    for t in 0..20 {
        let ch = ChannelRealization::sample(&scn, &RngStream::new(42, t));
        let out = nusvd_directions(&ch, 1e-8, 200).unwrap();
        total += out.iterations;
        if t < 5 { println!("trial {t}: iters {} converged {}", out.iterations, out.converged); }
    }
    println!("mean iters {} / elapsed for 20 designs: {:?}", total / 20, t0.elapsed());
}

#[test]
fn probe_gradient_time() {
    let scn = Scenario::with_common_snr_db(10, 2, 10, 0.99, 0.0).unwrap();
    let source = SourceModel::uniform(10, 0.99).unwrap();
    let t0 = Instant::now();
    let mut iters = 0;
    for t in 0..10 {
        let ch = ChannelRealization::sample(&scn, &RngStream::new(42, t));
        let out = design_gradient(&scn, &ch, &source, &GradientConfig::default()).unwrap();
        iters += out.iterations;
    }
    println!("gradient: mean iters {} / elapsed for 10 designs: {:?}", iters / 10, t0.elapsed());
}
