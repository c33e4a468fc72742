// temp repro: find a minimal failing instance
use fp_echelon::eliminate::sge_d;
use fp_echelon::parallel::{parallel_sge, ParallelSgeOptions};
use fp_echelon::Prime;

fn main() {
    let p = Prime::new(251).unwrap();
    let mut state = 9u64.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move |m: u64| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state % m
    };
    for nrows in 2..12usize {
        for trial in 0..2000 {
            let ncols = 6u32;
            let rows: Vec<Vec<(u32, u16)>> = (0..nrows)
                .map(|_| {
                    (0..ncols)
                        .filter_map(|c| {
                            if next(100) < 40 {
                                Some((c, next(250) as u16 + 1))
                            } else {
                                None
                            }
                        })
                        .collect()
                })
                .collect();
            let expect = sge_d(&rows, ncols, p);
            for t in [2usize, 3] {
                for warmup in [0usize, 1] {
                    let opts = ParallelSgeOptions { threads: t, warmup: Some(warmup), insert_threshold: 2 };
                    let got = parallel_sge(rows.clone(), ncols, p, &opts);
                    if got != expect {
                        println!("MISMATCH nrows={nrows} trial={trial} t={t} warmup={warmup}");
                        println!("rows = {rows:?}");
                        println!("expect = {expect:?}");
                        println!("got    = {got:?}");
                        return;
                    }
                }
            }
        }
    }
    println!("no mismatch found");
}
