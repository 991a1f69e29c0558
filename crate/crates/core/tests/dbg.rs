use railsim_core::*;

#[test]
fn dbg_ramp() {
    let mut pa = build_profile(350, Carrier::A).unwrap();
    pa.phy_jitter = 0.3;
    let cfg = SimConfig::new(pa.clone(), CcaConfig::Bbr, SimTime::from_secs(150), 9);
    let _ = run(&cfg);
    panic!("debug");
}

#[test]
fn dbg_timeline() {
    let seed: u64 = std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(9);
    let mut pa = build_profile(350, Carrier::A).unwrap();
    pa.phy_jitter = 0.3;
    let ccas = [
        ("bbr", CcaConfig::Bbr),
        ("l12", CcaConfig::BbrPlus { lambda: 0.5, decay_c: 0.15 }),
    ];
    for (name, cca) in ccas {
        let cfg = SimConfig::new(pa.clone(), cca, SimTime::from_secs(150), seed);
        let out = run(&cfg);
        println!("== {name} seed={seed}");
        for ho in &out.schedule {
            println!(
                "  ho {:?} start={:.2} end={:.2}",
                ho.kind,
                ho.ho_start.as_secs_f64(),
                ho.ho_end.as_secs_f64()
            );
        }
        // Goodput per 5 s bin from cumulative-ack growth.
        let mut bins = vec![0u64; 30];
        let mut last_cum = 0u64;
        let mut drops = std::collections::HashMap::new();
        for &(t, r) in &out.trace.records {
            match r {
                trace::Record::Ack { cum_bytes } if cum_bytes > last_cum => {
                    let b = (t.as_secs_f64() / 5.0) as usize;
                    bins[b.min(29)] += cum_bytes - last_cum;
                    last_cum = cum_bytes;
                }
                trace::Record::Drop { reason, .. } => {
                    *drops.entry(format!("{reason:?}")).or_insert(0u64) += 1;
                }
                _ => {}
            }
        }
        let mbps: Vec<String> =
            bins.iter().map(|&b| format!("{:.1}", b as f64 * 8.0 / 5.0 / 1e6)).collect();
        println!("  5s bins: {}", mbps.join(" "));
        println!("  drops: {drops:?}");
    }
    panic!("debug");
}

#[test]
fn dbg_sweep() {
    let mut pa = build_profile(350, Carrier::A).unwrap();
    pa.phy_jitter = 0.3;
    if std::env::var("NO_HO").is_ok() {
        for h in &mut pa.ho {
            h.rate_per_trace = 0.0;
        }
    }
    if let Ok(only) = std::env::var("ONLY_TYPE") {
        let keep: usize = only.parse().unwrap();
        for (i, h) in pa.ho.iter_mut().enumerate() {
            if i != keep {
                h.rate_per_trace = 0.0;
            }
        }
    }
    let ccas = [
        ("bbr", CcaConfig::Bbr),
        ("l18", CcaConfig::BbrPlus { lambda: 0.125, decay_c: 0.15 }),
        ("l12", CcaConfig::BbrPlus { lambda: 0.5, decay_c: 0.15 }),
    ];
    let mut per_cca_gp: Vec<Vec<f64>> = Vec::new();
    for (name, cca) in ccas {
        let mut gp = Vec::new();
        let mut tp = Vec::new();
        let mut rtt = Vec::new();
        let mut retx = Vec::new();
        for seed in 0..20u64 {
            let cfg = SimConfig::new(pa.clone(), cca.clone(), SimTime::from_secs(150), seed);
            let out = run(&cfg);
            let s = metrics::summarize(&out.trace).unwrap();
            println!("  {name} seed={seed} gp={:.3} rtt50={:.0}", s.goodput_mbps,
                s.rtt_ms.map(|p| p.p50).unwrap_or(0.0));
            if seed < 3 {
                let drops: u64 = s.dropped_packets;
                println!("    drops={drops} retx={}", s.retx_packets);
            }
            gp.push(s.goodput_mbps);
            tp.push(s.throughput_mbps);
            rtt.push(s.rtt_ms.map(|p| p.p50).unwrap_or(0.0));
            retx.push(s.retx_packets as f64);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{name}: goodput mean={:.3} min={:.3} max={:.3} thru={:.3} retx={:.0} p50rtt={:.0}",
            mean(&gp),
            gp.iter().cloned().fold(f64::MAX, f64::min),
            gp.iter().cloned().fold(f64::MIN, f64::max),
            mean(&tp),
            mean(&retx),
            mean(&rtt)
        );
        per_cca_gp.push(gp);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (bbr, l12) = (&per_cca_gp[0], &per_cca_gp[2]);
    let ratios: Vec<f64> = bbr.iter().zip(l12).map(|(b, p)| p / b).collect();
    println!(
        "ratio of means={:.3} mean of paired ratios={:.3} min ratio={:.3}",
        mean(l12) / mean(bbr),
        mean(&ratios),
        ratios.iter().cloned().fold(f64::MAX, f64::min)
    );
    panic!("debug");
}
