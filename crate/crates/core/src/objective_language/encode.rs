use super::ast::LagrangianObjective;
use crate::term_algebra::TermVector;

/// Encodes the non-opaque part of an objective into basis coordinates.
///
/// The result is `R·n` plus the directly written `E_*[log ·]` terms, where
/// `n` stacks the twelve coefficient slots in the frozen expression order;
/// opaque atoms are excluded. Linear in the objective by construction.
pub fn encode_kl(obj: &LagrangianObjective) -> TermVector {
    let mut out = obj.log_terms.clone();
    for (e, c) in obj.kl_part.iter_nonzero() {
        out = out.add(&e.encoding().scale(c));
    }
    out
}
