//! Prints the Markov chain transition factor for a few unit counts.
//!
//! cargo run --example transition_factor -- [K] [a]

use mclda::transition_factor;

fn main() -> mclda::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(50, |s| s.parse().expect("K"));
    let a: f64 = args.next().map_or(10.0, |s| s.parse().expect("a"));
    let t = transition_factor(k, a)?;
    let sum: f64 = t.table().iter().sum();
    println!("K={k} a={a}");
    println!("  diagonal     {:.6e}", t.get(0, 0));
    if k > 1 {
        println!("  off-diagonal {:.6e}", t.get(0, 1));
        println!("  ratio        {}", t.get(0, 0) / t.get(0, 1));
    }
    println!("  table sum    {sum}");
    if k <= 6 {
        for r in 0..k {
            let row: Vec<String> = (0..k).map(|c| format!("{:.4}", t.get(r, c))).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
