//! gnuplot scripts and data files. The scripts render PNGs next to
//! themselves when run from the output directory (`gnuplot frequency.gp`).

use std::fmt::Write;

use crate::analysis::BlowupStage;

pub fn frequency_script(csv: &str) -> String {
    format!(
        "set datafile separator ','
set terminal pngcairo size 900,700
set output 'frequency.png'
set logscale x
set xlabel 'rho'
set key bottom right
set multiplot layout 2,1
set ylabel 'N(rho)'
plot '{csv}' using 1:4 skip 1 with linespoints pt 7 title 'N', 1.5 with lines dashtype 2 title '3/2'
set ylabel 'doubling'
plot '{csv}' using 1:5 skip 1 with linespoints pt 7 title 'doubling', 2**1.5 with lines dashtype 2 title '2^{{3/2}}'
unset multiplot
"
    )
}

pub fn decay_script(csv: &str, slopes: [f64; 3]) -> String {
    format!(
        "set datafile separator ','
set terminal pngcairo size 900,600
set output 'decay.png'
set logscale xy
set xlabel 'rho'
set key top left
plot '{csv}' using 1:2 skip 1 with linespoints pt 7 title 'L2 average (slope {:.3})', \\
     '{csv}' using 1:3 skip 1 with linespoints pt 5 title 'sup |u| (slope {:.3})', \\
     '{csv}' using 1:4 skip 1 with linespoints pt 9 title 'sup |grad u| (slope {:.3})'
",
        slopes[0], slopes[1], slopes[2]
    )
}

pub fn blowup_data(stages: &[BlowupStage]) -> String {
    let mut s = String::from("# j rho c0 c1 degree amplitude ref_c0 ref_c1\n");
    for (j, st) in stages.iter().enumerate() {
        let (r0, r1) = st.reference.map_or((f64::NAN, f64::NAN), |r| (r.c0_distance, r.c1_distance));
        writeln!(
            s,
            "{j} {} {} {} {} {} {r0} {r1}",
            st.rho, st.c0_distance, st.c1_distance, st.degree, st.amplitude
        )
        .unwrap();
    }
    s
}

pub fn blowup_script(data: &str) -> String {
    format!(
        "set terminal pngcairo size 900,600
set output 'blowup.png'
set logscale y
set xlabel 'j (rho_j = 0.4 2^{{-j}})'
set ylabel 'distance'
set xtics 1
plot '{data}' using 1:4 with linespoints pt 7 title 'C1 to homogeneous profile', \\
     '{data}' using 1:3 with linespoints pt 5 title 'C0 to homogeneous profile', \\
     '{data}' using 1:8 with linespoints pt 9 title 'C1 to discrete reference'
"
    )
}
