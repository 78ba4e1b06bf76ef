//! Synthetic mini-corpus generator: templates crossed with entity pools.
//!
//! Four contract-flavored legal issues ship, each with its own fact schema
//! and several template wordings. Case texts are produced by instantiating a
//! template with entities drawn from per-type pools, and the gold facts are
//! built from the same entity assignment, so every generated record is valid
//! and round-trips cleanly. Wordings within an issue share phrasing, which
//! gives the embedding space a clustered structure.

use super::{Record, SplitMix64};
use crate::proleg::{parse_fact_set, RuleText};
use crate::templates::{EntityMap, Template};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    /// How many of the authored legal issues to use (max 4).
    pub issues: usize,
    /// Template wordings per issue; above the authored set, numbered
    /// variants are derived.
    pub templates_per_issue: usize,
    /// Records sharing each template (1 reproduces the one-sample-per-
    /// template regime; higher values exercise grouped splits).
    pub records_per_template: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            issues: 4,
            templates_per_issue: 6,
            records_per_template: 1,
        }
    }
}

struct Issue {
    key: &'static str,
    contract_type: super::ContractType,
    legal_issue: &'static str,
    /// (entity type, pool of surface values)
    pools: &'static [(&'static str, &'static [&'static str])],
    /// Fact lines with `{Type}` slots, newline-joined after filling.
    fact_lines: &'static [&'static str],
    rules: &'static str,
    wordings: &'static [&'static str],
}

const PEOPLE_A: &[&str] = &["Emma", "Lucas", "Olivia", "Noah", "Harper", "Sofia"];
const PEOPLE_B: &[&str] = &["Mason", "Mia", "Ethan", "Ava", "Liam", "Isabella"];
const OBJECTS: &[&str] = &[
    "a laptop",
    "the conference room",
    "a delivery van",
    "an espresso machine",
    "a concert piano",
    "a 3D printer",
];
const AGREEMENTS: &[&str] = &[
    "lease78",
    "loan-2023-04",
    "rental12",
    "contract 91",
    "deal-55",
    "arrangement 7",
];
const DATES: &[&str] = &[
    "2023/08/20",
    "2023/06/30",
    "2024/01/10",
    "2024/03/05",
    "2023/11/17",
    "2024/05/02",
];
const HARMS: &[&str] = &[
    "a shortage of supplies during a critical time",
    "clients began avoiding the venue",
    "a loss of trust among long-standing partners",
    "mounting repair costs and cancelled bookings",
    "a public dispute that reached local news",
    "weeks of interrupted operations",
];
const WORKS: &[&str] = &[
    "a hit single",
    "an orchestral suite",
    "a viral jingle",
    "an acoustic ballad",
    "a film score",
    "a dance track",
];
const PLATFORMS: &[&str] = &[
    "SoundCloud",
    "Instagram",
    "TikTok",
    "his public channel",
    "a streaming service",
    "an online forum",
];

const ISSUES: &[Issue] = &[
    Issue {
        key: "loan",
        contract_type: super::ContractType::Loan,
        legal_issue: "The borrower damaged a lent asset and the lender seeks repair costs.",
        pools: &[
            ("Lender", PEOPLE_A),
            ("Borrower", PEOPLE_B),
            ("Object", OBJECTS),
            ("Agreement", AGREEMENTS),
            ("T_discovery", DATES),
        ],
        fact_lines: &[
            "lender(\"{Lender}\").",
            "borrower(\"{Borrower}\").",
            "owned_by(\"{Object}\",\"{Lender}\").",
            "borrowing_agreement(\"{Agreement}\").",
            "damage_fact(\"{Borrower}\",\"{Object}\").",
            "discovery_fact(\"{Lender}\",\"{Object}\",\"{T_discovery}\").",
        ],
        rules: "right_to_repair_payment(_Lender, _Borrower, _Object) <=\n    lender(_Lender), borrower(_Borrower),\n    owned_by(_Object, _Lender),\n    borrowing_agreement(_Agreement),\n    damage_fact(_Borrower, _Object),\n    discovery_fact(_Lender, _Object, _T_discovery).",
        wordings: &[
            "{Lender} lent {Object} to {Borrower} under {Agreement}. While in use, {Borrower} damaged {Object}. The damage was discovered on {T_discovery}. Can {Lender} demand repair costs?",
            "Under {Agreement}, {Borrower} borrowed {Object} from {Lender}. {Borrower} returned {Object} broken, which {Lender} noticed on {T_discovery}. Can {Lender} demand repair costs?",
            "{Borrower} received {Object} from {Lender} as part of {Agreement}. {Object} came back damaged, and {Lender} discovered this on {T_discovery}. Can {Lender} demand repair costs?",
            "As agreed in {Agreement}, {Lender} handed {Object} over to {Borrower}. {Borrower} mishandled {Object}, and on {T_discovery} {Lender} found the damage. Can {Lender} demand repair costs?",
            "{Lender} provided {Object} to {Borrower} per {Agreement}. During the loan {Borrower} broke {Object}; {Lender} learned of it on {T_discovery}. Can {Lender} demand repair costs?",
            "Following {Agreement}, {Object} went from {Lender} to {Borrower}. It was damaged in {Borrower}'s care, a fact {Lender} uncovered on {T_discovery}. Can {Lender} demand repair costs?",
        ],
    },
    Issue {
        key: "lease",
        contract_type: super::ContractType::Lease,
        legal_issue: "The borrower's unauthorized use of leased property harmed the lender's reputation.",
        pools: &[
            ("Lender", PEOPLE_A),
            ("Borrower", PEOPLE_B),
            ("Object", OBJECTS),
            ("Agreement", AGREEMENTS),
            ("Harm", HARMS),
            ("T_discovery", DATES),
        ],
        fact_lines: &[
            "lender(\"{Lender}\").",
            "borrower(\"{Borrower}\").",
            "owned_by(\"{Object}\",\"{Lender}\").",
            "borrowing_agreement(\"{Agreement}\").",
            "use_under_agreement(\"{Borrower}\",\"{Object}\",\"{Agreement}\").",
            "violation_of_agreement(\"{Borrower}\",\"{Agreement}\").",
            "harm_fact(\"{Harm}\",\"{Lender}\").",
            "discovery_fact(\"{Lender}\",\"{Object}\",\"{T_discovery}\").",
        ],
        rules: "right_to_legal_action(_Lender, _Borrower, _Object) <=\n    harm_to_lender_rights(_Borrower, _Lender, _Object),\n    discovery_of_harm(_Lender, _Object, _T_discovery).\n\nharm_to_lender_rights(_Borrower, _Lender, _Object) <=\n    borrower(_Borrower), lender(_Lender),\n    owned_by(_Object, _Lender),\n    borrowing_agreement(_Agreement),\n    use_under_agreement(_Borrower, _Object, _Agreement),\n    violation_of_agreement(_Borrower, _Agreement),\n    harm_fact(_Harm, _Lender).",
        wordings: &[
            "{Object} was leased to {Borrower} by {Lender} as part of {Agreement}. {Borrower} used it for unapproved purposes, which resulted in {Harm}. These actions were discovered on {T_discovery}. Does {Lender} have grounds for legal action?",
            "Per {Agreement}, {Lender} let {Borrower} use {Object}. {Borrower} put it to unauthorized use, causing {Harm}. {Lender} found out on {T_discovery}. Does {Lender} have grounds for legal action?",
            "Under {Agreement}, {Borrower} held {Object} belonging to {Lender}. Misuse by {Borrower} led to {Harm}, discovered on {T_discovery}. Does {Lender} have grounds for legal action?",
            "{Lender} entrusted {Object} to {Borrower} through {Agreement}. {Borrower} breached its terms, and the misuse produced {Harm}. The breach came to light on {T_discovery}. Does {Lender} have grounds for legal action?",
            "{Borrower} rented {Object} from {Lender} via {Agreement}, then used it against the agreed terms. This caused {Harm}, noticed by {Lender} on {T_discovery}. Does {Lender} have grounds for legal action?",
            "Through {Agreement}, {Object} was placed with {Borrower} by {Lender}. Unauthorized use followed, bringing {Harm}; {Lender} discovered the situation on {T_discovery}. Does {Lender} have grounds for legal action?",
        ],
    },
    Issue {
        key: "purchase",
        contract_type: super::ContractType::Purchase,
        legal_issue: "The buyer missed the payment deadline after delivery.",
        pools: &[
            ("Seller", PEOPLE_A),
            ("Buyer", PEOPLE_B),
            ("Object", OBJECTS),
            ("Agreement", AGREEMENTS),
            ("T_due", DATES),
        ],
        fact_lines: &[
            "seller(\"{Seller}\").",
            "buyer(\"{Buyer}\").",
            "purchase_agreement(\"{Agreement}\").",
            "delivered(\"{Object}\",\"{Buyer}\").",
            "payment_due(\"{Buyer}\",\"{Seller}\",\"{T_due}\").",
            "missed_payment_fact(\"{Buyer}\",\"{Seller}\",\"{Object}\").",
        ],
        rules: "right_to_payment(_Seller, _Buyer, _Object) <=\n    seller(_Seller), buyer(_Buyer),\n    purchase_agreement(_Agreement),\n    delivered(_Object, _Buyer),\n    payment_due(_Buyer, _Seller, _T_due),\n    missed_payment_fact(_Buyer, _Seller, _Object).",
        wordings: &[
            "{Seller} sold {Object} to {Buyer} under {Agreement}. {Object} was delivered, but {Buyer} missed the payment due on {T_due}. Can {Seller} claim the outstanding payment?",
            "Under {Agreement}, {Buyer} purchased {Object} from {Seller}. Despite delivery, no payment arrived by {T_due}. Can {Seller} claim the outstanding payment?",
            "{Buyer} agreed in {Agreement} to buy {Object} from {Seller}. {Seller} delivered on time, yet the amount due {T_due} was never paid. Can {Seller} claim the outstanding payment?",
            "As set out in {Agreement}, {Object} passed from {Seller} to {Buyer}. The invoice dated {T_due} remains unpaid by {Buyer}. Can {Seller} claim the outstanding payment?",
            "{Seller} shipped {Object} to {Buyer} per {Agreement}, with payment expected by {T_due}. {Buyer} has not paid. Can {Seller} claim the outstanding payment?",
            "Per the terms of {Agreement}, {Buyer} took delivery of {Object} from {Seller}. Payment promised for {T_due} never came. Can {Seller} claim the outstanding payment?",
        ],
    },
    Issue {
        key: "copyright",
        contract_type: super::ContractType::Copyright,
        legal_issue: "A derivative work was shared publicly without the creator's consent.",
        pools: &[
            ("Creator", PEOPLE_A),
            ("Adapter", PEOPLE_B),
            ("Work", WORKS),
            ("Platform", PLATFORMS),
        ],
        fact_lines: &[
            "creator(\"{Creator}\",\"{Work}\").",
            "adapter(\"{Adapter}\").",
            "derivative_work_fact(\"{Adapter}\",\"{Work}\").",
            "shared_without_consent(\"{Adapter}\",\"{Work}\",\"{Platform}\").",
            "demob :- block(right_to_claim_authorship(\"{Creator}\",\"{Adapter}\")).",
        ],
        rules: "right_to_claim_authorship(_Creator, _Adapter) <=\n    creator(_Creator, _Work),\n    adapter(_Adapter),\n    derivative_work_fact(_Adapter, _Work),\n    shared_without_consent(_Adapter, _Work, _Platform).",
        wordings: &[
            "{Adapter} admires {Creator} and often listened to {Work}. {Adapter} released a new version by adjusting the vocals while keeping the hook, sharing it on {Platform} as an original. Does {Creator} keep a claim to authorship?",
            "{Creator} composed {Work}. {Adapter} reworked it, changing the tempo but preserving the melody, and posted the result on {Platform} under {Adapter}'s own name. Does {Creator} keep a claim to authorship?",
            "A fan of {Creator}, {Adapter} sampled {Work} heavily in a new track and published it on {Platform} without asking. Does {Creator} keep a claim to authorship?",
            "{Adapter} took {Work} by {Creator}, altered the arrangement, and uploaded the remix to {Platform} as independent work. Does {Creator} keep a claim to authorship?",
            "Having studied {Work} for years, {Adapter} produced a close variation and shared it across {Platform} crediting only {Adapter}. Does {Creator} keep a claim to authorship?",
            "{Creator}'s {Work} inspired {Adapter} to cut a derivative version, now circulating on {Platform} without consent. Does {Creator} keep a claim to authorship?",
        ],
    },
];

fn fill(template: &str, entities: &EntityMap) -> String {
    let mut out = template.to_string();
    for (entity_type, value) in entities.iter() {
        out = out.replace(&format!("{{{entity_type}}}"), value);
    }
    out
}

/// Generate a deterministic synthetic corpus.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Vec<Record> {
    let mut rng = SplitMix64::new(cfg.seed);
    let mut records = Vec::new();
    for issue in ISSUES.iter().take(cfg.issues.min(ISSUES.len())) {
        for t in 0..cfg.templates_per_issue {
            let base = issue.wordings[t % issue.wordings.len()];
            let template_text = if t < issue.wordings.len() {
                base.to_string()
            } else {
                format!("{base} (scenario {})", t / issue.wordings.len() + 1)
            };
            let template = Template::parse(&template_text).expect("authored template parses");
            for r in 0..cfg.records_per_template {
                let mut entities = EntityMap::new();
                for (entity_type, pool) in issue.pools {
                    let value = pool[rng.next_below(pool.len())];
                    entities.insert(*entity_type, value).expect("valid pool entry");
                }
                let case = template.instantiate(&entities).expect("all types bound");
                let facts_text = issue
                    .fact_lines
                    .iter()
                    .map(|line| fill(line, &entities))
                    .collect::<Vec<_>>()
                    .join("\n");
                let facts = parse_fact_set(&facts_text).expect("authored facts parse");
                records.push(Record {
                    id: format!("{}-t{t:02}-r{r:02}", issue.key),
                    legal_issue: issue.legal_issue.to_string(),
                    case_text: case.text,
                    entities,
                    template_text: template_text.clone(),
                    template: template.clone(),
                    facts,
                    rules: RuleText::parse(issue.rules),
                    contract_type: Some(issue.contract_type),
                });
            }
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{corpus_stats, validate_record};

    #[test]
    fn default_corpus_is_valid() {
        let corpus = synthetic_corpus(&SynthConfig::default());
        assert_eq!(corpus.len(), 24);
        let mut warnings = Vec::new();
        for record in &corpus {
            let raw = record.to_raw();
            validate_record(&raw, &mut warnings).unwrap();
        }
        assert!(
            warnings.is_empty(),
            "synthetic records must round-trip: {warnings:?}"
        );
    }

    #[test]
    fn generator_is_deterministic() {
        let a = synthetic_corpus(&SynthConfig::default());
        let b = synthetic_corpus(&SynthConfig::default());
        let ids_a: Vec<_> = a.iter().map(|r| (&r.id, &r.case_text)).collect();
        let ids_b: Vec<_> = b.iter().map(|r| (&r.id, &r.case_text)).collect();
        assert_eq!(ids_a, ids_b);
    }

    #[test]
    fn stats_reflect_configuration() {
        let corpus = synthetic_corpus(&SynthConfig {
            issues: 2,
            templates_per_issue: 4,
            records_per_template: 3,
            ..SynthConfig::default()
        });
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.n_samples, 24);
        assert_eq!(stats.n_templates, 8);
        assert_eq!(stats.n_legal_issues, 2);
    }

    #[test]
    fn extra_templates_stay_distinct() {
        let corpus = synthetic_corpus(&SynthConfig {
            issues: 1,
            templates_per_issue: 10,
            ..SynthConfig::default()
        });
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.n_templates, 10);
    }

    #[test]
    fn copyright_gold_includes_a_rule_line() {
        let corpus = synthetic_corpus(&SynthConfig::default());
        let copyright = corpus.iter().find(|r| r.id.starts_with("copyright")).unwrap();
        assert_eq!(copyright.facts.rule_lines.len(), 1);
        assert!(copyright.facts.rule_lines[0].starts_with("demob :- block("));
    }
}
