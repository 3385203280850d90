fn main() {
    let seed = orthofam_core::fullsupport::SignCondition::default_seed(2).unwrap();
    let mut cond = seed;
    for stage in 1..=6u32 {
        let t = std::time::Instant::now();
        let h = cond.rows();
        for i in 0..h {
            for j in (i + 1)..h {
                cond.require_pair(i, j, orthofam_core::exact::rat(1, stage as i64)).unwrap();
            }
        }
        let t_req = t.elapsed();
        let t = std::time::Instant::now();
        cond.pad_block(stage).unwrap();
        let t_pad = t.elapsed();
        let t = std::time::Instant::now();
        cond.double();
        let t_dbl = t.elapsed();
        println!("stage {stage}: h={h} req={t_req:?} pad={t_pad:?} double={t_dbl:?} reqs={}", cond.requirements().len());
    }
}
