use num::One;

use crate::objective_language::{
    AtomKind, BasisTerm, DistRef, DivergenceAtom, Family, KlExpression, LagrangianObjective,
    Signature,
};
use crate::term_algebra::{rat_int, Rational};

/// Named objectives with their dual form and stated tractable form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CatalogObjective {
    Vae,
    BetaVae(Rational),
    Vmi,
    InfoGan(Rational, Rational),
    InfoVae(Rational, Rational, Rational),
    InfoBiGan(Rational, Rational, Rational),
    Aae,
    Alice,
    CycleGan,
    AsVae,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    /// The objective written over mutual informations and consistency
    /// divergences (some with extra opaque atoms).
    pub dual: LagrangianObjective,
    /// The equivalent form using only terms of the objective's
    /// computability class; identical atoms.
    pub tractable: LagrangianObjective,
}

struct Builder(LagrangianObjective);

impl Builder {
    fn new() -> Self {
        Builder(LagrangianObjective::zero())
    }

    fn kl(mut self, e: KlExpression, c: Rational) -> Self {
        self.0.add_expression(e, &c);
        self
    }

    fn log(mut self, outer: Family, fam: Family, sig: Signature, c: Rational) -> Self {
        self.0
            .add_log_term(BasisTerm::new(outer, DistRef::new(fam, sig)), &c);
        self
    }

    fn atom(mut self, kind: AtomKind, leading: Family, sig: Signature, c: Rational) -> Self {
        let left = DistRef::new(leading, sig);
        let right = DistRef::new(leading.other(), sig);
        self.0
            .add_atom(DivergenceAtom::new(kind, left, right, c).expect("same signature"));
        self
    }

    fn build(self, label: &str) -> LagrangianObjective {
        self.0.with_label(label)
    }
}

use KlExpression as E;
use Signature as S;

fn one() -> Rational {
    Rational::one()
}

impl CatalogObjective {
    pub fn name(&self) -> String {
        match self {
            CatalogObjective::Vae => "VAE".into(),
            CatalogObjective::BetaVae(_) => "betaVAE".into(),
            CatalogObjective::Vmi => "VMI".into(),
            CatalogObjective::InfoGan(..) => "InfoGAN".into(),
            CatalogObjective::InfoVae(..) => "InfoVAE".into(),
            CatalogObjective::InfoBiGan(..) => "InfoBiGAN".into(),
            CatalogObjective::Aae => "AAE".into(),
            CatalogObjective::Alice => "ALICE".into(),
            CatalogObjective::CycleGan => "CycleGAN".into(),
            CatalogObjective::AsVae => "ASVAE".into(),
        }
    }
}

/// Builds the dual and tractable forms for a named objective.
pub fn catalog(which: &CatalogObjective) -> CatalogEntry {
    let name = which.name();
    let (dual, tractable) = match which {
        CatalogObjective::Vae => {
            let dual = Builder::new()
                .kl(E::kl(Family::Q, S::Joint), one())
                .build("VAE dual");
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .log(Family::Q, Family::Q, S::CondZGivenX, one())
                .log(Family::Q, Family::P, S::MargZ, -one())
                .build("VAE tractable");
            (dual, tract)
        }
        CatalogObjective::BetaVae(beta) => {
            let dual = Builder::new()
                .kl(E::InfoQ, beta - rat_int(1))
                .kl(E::kl(Family::Q, S::CondXGivenZ), one())
                .kl(E::kl(Family::Q, S::MargZ), beta.clone())
                .build("betaVAE dual");
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .log(Family::Q, Family::Q, S::CondZGivenX, beta.clone())
                .log(Family::Q, Family::P, S::MargZ, -beta.clone())
                .build("betaVAE tractable");
            (dual, tract)
        }
        CatalogObjective::Vmi => {
            let dual = Builder::new()
                .kl(E::InfoP, -one())
                .kl(E::kl(Family::P, S::CondZGivenX), one())
                .build("VMI dual");
            // exact arithmetic forces the negative sign on the maximized
            // conditional-likelihood term (the objective is minimized)
            let tract = Builder::new()
                .log(Family::P, Family::Q, S::CondZGivenX, -one())
                .build("VMI tractable");
            (dual, tract)
        }
        CatalogObjective::InfoGan(l1, l2) => {
            let dual = Builder::new()
                .kl(E::InfoP, -one())
                .kl(E::kl(Family::P, S::CondZGivenX), one())
                .kl(E::kl(Family::P, S::MargX), l1.clone())
                .kl(E::kl(Family::Q, S::MargX), l2.clone())
                .build("InfoGAN dual");
            let tract = Builder::new()
                .log(Family::P, Family::Q, S::CondZGivenX, -one())
                .kl(E::kl(Family::P, S::MargX), l1.clone())
                .kl(E::kl(Family::Q, S::MargX), l2.clone())
                .build("InfoGAN tractable");
            (dual, tract)
        }
        CatalogObjective::InfoVae(a1, l3, l4) => {
            let dual = Builder::new()
                .kl(E::InfoQ, a1.clone())
                .kl(E::kl(Family::Q, S::CondXGivenZ), one())
                .kl(E::kl(Family::Q, S::MargZ), l3.clone())
                .kl(E::kl(Family::P, S::MargZ), l4.clone())
                .build("InfoVAE dual");
            let a1p1 = a1 + rat_int(1);
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .log(Family::Q, Family::Q, S::CondZGivenX, a1p1.clone())
                .log(Family::Q, Family::P, S::MargZ, -a1p1.clone())
                .kl(E::kl(Family::Q, S::MargZ), l3 - &a1p1)
                .kl(E::kl(Family::P, S::MargZ), l4.clone())
                .build("InfoVAE tractable");
            (dual, tract)
        }
        CatalogObjective::InfoBiGan(a2, l5, l6) => {
            let dual = Builder::new()
                .kl(E::InfoP, a2.clone())
                .kl(E::kl(Family::P, S::CondZGivenX), one())
                .kl(E::kl(Family::P, S::MargX), l5.clone())
                .kl(E::kl(Family::Q, S::MargX), l6.clone())
                .build("InfoBiGAN dual");
            let a2p1 = a2 + rat_int(1);
            // the conditional-likelihood term enters with +α₂ (forced by
            // exact expansion of the left-hand side)
            let tract = Builder::new()
                .kl(E::kl(Family::P, S::Joint), a2p1.clone())
                .kl(E::kl(Family::P, S::MargX), l5 - &a2p1)
                .kl(E::kl(Family::Q, S::MargX), l6.clone())
                .log(Family::P, Family::Q, S::CondZGivenX, a2.clone())
                .build("InfoBiGAN tractable");
            (dual, tract)
        }
        CatalogObjective::Aae => {
            let dual = Builder::new()
                .kl(E::InfoQ, -one())
                .kl(E::kl(Family::Q, S::CondXGivenZ), one())
                .atom(AtomKind::Js, Family::Q, S::MargZ, one())
                .build("AAE dual");
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .atom(AtomKind::Js, Family::Q, S::MargZ, one())
                .build("AAE tractable");
            (dual, tract)
        }
        CatalogObjective::Alice => {
            let dual = Builder::new()
                .kl(E::InfoQ, -one())
                .kl(E::kl(Family::Q, S::CondXGivenZ), one())
                .atom(AtomKind::Js, Family::Q, S::Joint, one())
                .build("ALICE dual");
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .atom(AtomKind::Js, Family::Q, S::Joint, one())
                .build("ALICE tractable");
            (dual, tract)
        }
        CatalogObjective::CycleGan => {
            let dual = Builder::new()
                .kl(E::InfoQ, -one())
                .kl(E::InfoP, -one())
                .kl(E::kl(Family::Q, S::CondXGivenZ), one())
                .kl(E::kl(Family::P, S::CondZGivenX), one())
                .atom(AtomKind::Js, Family::Q, S::MargX, one())
                .atom(AtomKind::Js, Family::Q, S::MargZ, one())
                .build("CycleGAN dual");
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .log(Family::P, Family::Q, S::CondZGivenX, -one())
                .atom(AtomKind::Js, Family::Q, S::MargX, one())
                .atom(AtomKind::Js, Family::Q, S::MargZ, one())
                .build("CycleGAN tractable");
            (dual, tract)
        }
        CatalogObjective::AsVae => {
            let dual = Builder::new()
                .kl(E::InfoQ, -one())
                .kl(E::InfoP, -one())
                .kl(E::kl(Family::Q, S::Joint), one())
                .kl(E::kl(Family::P, S::Joint), one())
                .kl(E::kl(Family::P, S::CondXGivenZ), one())
                .kl(E::kl(Family::Q, S::CondZGivenX), one())
                .build("ASVAE dual");
            // symmetric reconstruction plus both joint divergences, with
            // unary corrections that the exact rewriting requires
            let tract = Builder::new()
                .log(Family::Q, Family::P, S::CondXGivenZ, -one())
                .log(Family::P, Family::Q, S::CondZGivenX, -one())
                .kl(E::kl(Family::Q, S::Joint), one())
                .kl(E::kl(Family::P, S::Joint), one())
                .kl(E::kl(Family::P, S::MargX), one())
                .kl(E::kl(Family::Q, S::MargX), -one())
                .kl(E::kl(Family::Q, S::MargZ), one())
                .kl(E::kl(Family::P, S::MargZ), -one())
                .build("ASVAE tractable");
            (dual, tract)
        }
    };
    CatalogEntry {
        name,
        dual,
        tractable,
    }
}
