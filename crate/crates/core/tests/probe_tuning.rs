// scratch probe for tuning the synthetic bias levels; removed before final
use fairlens::dataset::SynthSpec;

#[test]
#[ignore]
fn probe_calibration_seeds() {
    for seed in [42u64, 1, 2, 3, 5, 7, 11, 13, 17, 19, 23, 2002] {
        let mut spec = SynthSpec::table1();
        spec.seed = seed;
        let data = spec.generate(100_000).unwrap();
        let mut worst: f64 = 0.0;
        for (code, g) in spec.groups.iter().enumerate() {
            let n_g = data
                .group()
                .iter()
                .filter(|&&c| usize::from(c) == code)
                .count();
            let pos = (0..data.n_rows())
                .filter(|&i| usize::from(data.group()[i]) == code && data.outcome()[i] == 1)
                .count();
            let emp = pos as f64 / n_g as f64;
            worst = worst.max((emp - g.positive_rate).abs());
        }
        eprintln!("seed {seed}: worst abs deviation {worst:.5}");
    }
}
