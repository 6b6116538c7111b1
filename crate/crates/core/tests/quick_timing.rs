use wiener_optomech::corpus::{check_point, corpus};

#[test]
fn time_representative_points() {
    let pts = corpus().unwrap();
    for (i, p) in pts.iter().enumerate() {
        if i % 20 == 0 {
            println!("label[{i}] = {}", p.label);
        }
    }
    for idx in [0usize, 61, 108, 123, 145, 149, 153, 158, 159] {
        let p = &pts[idx];
        let t0 = std::time::Instant::now();
        let r = check_point(&p.sys);
        println!("[{idx:3}] {:55} {:>10.2?}  {:?}", p.label, t0.elapsed(), r.err());
    }
}
