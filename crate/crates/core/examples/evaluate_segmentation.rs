//! Scores a hand-made unit sequence against a reference phone alignment.

use std::collections::BTreeMap;

use mclda::{evaluate, segments_from_units, Alignment, AlignmentEntry, UnitSequence};

fn entry(start_ms: u64, end_ms: u64, label: &str) -> AlignmentEntry {
    AlignmentEntry {
        start_ms,
        end_ms,
        label: label.to_string(),
    }
}

fn main() -> mclda::Result<()> {
    let reference = Alignment::new(
        "utt1",
        vec![entry(0, 100, "s"), entry(100, 200, "ih"), entry(200, 300, "t"), entry(300, 400, "sil")],
    )?;
    let units = UnitSequence {
        utterance_id: "utt1".into(),
        units: vec![3, 3, 3, 3, 3, 7, 7, 7, 7, 1, 1, 1, 1, 1, 1, 4, 9, 9, 9, 9],
    };
    for s in segments_from_units(&units, 20)? {
        println!("  [{:>3}, {:>3}) unit {}", s.start_ms, s.end_ms, s.unit);
    }
    let alignments = BTreeMap::from([("utt1".to_string(), reference)]);
    let r = evaluate(&[units], &alignments, 20, 20)?;
    println!("precision {:.1}", r.precision);
    println!("recall    {:.1}", r.recall);
    println!("F1        {:.1}", r.f1);
    println!("R-value   {:.1}", r.r_value);
    println!("purity    {:.1}", r.purity);
    println!("singleton {:.1}%", r.singleton_pct);
    println!("NMI       {:.1}", r.nmi);
    Ok(())
}
