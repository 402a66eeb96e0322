//! Statistical robust Chinese remaindering for several real numbers.
//!
//! `N` unknown reals are observed through `L` moduli `m_l = Γ·M_l`. For every
//! modulus we see the `N` noisy residues as an unordered set, so which residue
//! belongs to which number is unknown. This crate recovers the numbers by
//! clustering the residues on the circle of circumference `Γ` and then
//! applying single-number robust CRT to each cluster.
//!
//! * [`algo1`]: MAP clustering by enumerating cutting points of the circle.
//! * [`algo2`]: alternating matching/centre updates on the wrapped mixture.
//! * [`voting`]: majority voting over moduli subsets and an error-tolerant
//!   single-number decoder.
//! * [`noise`]: instance generation and separation probabilities.
//! * [`oracle`]: brute-force references used to check all of the above.
//!
//! ```
//! use rcrt::{reconstruct_algo2, ModulusSet, ObservationMatrix};
//!
//! let ms = ModulusSet::with_weights(5.0, vec![2, 3], vec![1.0, 1.0])?;
//! let obs = ObservationMatrix::from_columns(vec![vec![1.0, 9.0], vec![10.0, 3.0]])?;
//! let mut ys: Vec<f64> = reconstruct_algo2(&obs, &ms)?.iter().map(|e| e.y_hat).collect();
//! ys.sort_by(f64::total_cmp);
//! assert_eq!(ys, vec![10.5, 18.5]);
//! # Ok::<(), rcrt::RcrtError>(())
//! ```

pub mod algo1;
pub mod algo2;
pub mod error;
pub mod modular;
pub mod noise;
pub mod observation;
pub mod oracle;
mod quadrature;
pub mod single;
pub mod voting;

pub use algo1::{map_clustering, reconstruct_algo1};
pub use algo2::{reconstruct_algo2, run_algo2, Algo2Options};
pub use error::{RcrtError, Result};
pub use modular::{crt_reconstruct, project_common, wrapped_distance, ModulusSet};
pub use observation::{Clustering, Estimate, ObservationMatrix};
pub use single::{estimate_common_residue, reconstruct_single, ClusterResidues};

/// Book chapters, compiled as doctests so the guide cannot drift from the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        };
    }
    chapter!(introduction, "introduction.md");
    chapter!(circle, "circle.md");
    chapter!(single_number, "single_number.md");
    chapter!(cutting_points, "cutting_points.md");
    chapter!(alternating, "alternating.md");
    chapter!(voting, "voting.md");
    chapter!(noise, "noise.md");
    chapter!(oracles, "oracles.md");
}
