//! Shared fixtures for integration tests: the worked example record (a legal
//! case with its entity annotations, template, and gold fact block).

#![allow(dead_code)]

use legal2logic::templates::EntityMap;

pub const CASE_TEXT: &str = "Medical supplies were given to the hospital by the health organization as part of a supply agreement, intended for patient treatment. Instead, the hospital redistributed the supplies to external clinics without consent. This resulted in a shortage of supplies during a critical time, affecting patient care. These actions were discovered on 2023/08/20. Does the health organization have grounds for legal action to protect their reputation?";

pub const TEMPLATE_TEXT: &str = "{Object} was given to {Borrower} by {Lender} as part of {Agreement}, meant for patient treatment. Instead, {Borrower} redistributed supplies to external clinics without consent. This resulted in {Harm}. These actions were discovered on {T_discovery}. Does {Lender} have grounds for legal action to protect their reputation?";

pub const FACTS_BLOCK: &str = r#"borrower("The hospital").
lender("the health organization").
owned_by("medical supplies", "the health organization").
borrowing_agreement("a supply agreement").
agreement_fact("The hospital", "medical supplies", "a supply agreement").
violation_of_agreement("The hospital", "a supply agreement").
harm_fact("a shortage of supplies during a critical time", "the health organization")
discovery_fact("the health organization", "medical supplies", "2023/08/20")"#;

pub const RULES_BLOCK: &str = r#"right_to_legal_action(_Lender, _Borrower, _Object) <=
    harm_to_lender_rights(_Borrower, _Lender, _Object),
    discovery_of_harm(_Lender, _Object, _T_discovery).

harm_to_lender_rights(_Borrower, _Lender, _Object) <=
    borrower(_Borrower), lender(_Lender),
    owned_by(_Object, _Lender),
    borrowing_agreement(_Agreement),
    use_under_agreement(_Borrower, _Object, _Agreement),
    unlawful_use(_Borrower, _Object),
    reputational_damage(_Lender, _Harm).

unlawful_use(_Borrower, _Object) <=
    use_under_agreement(_Borrower, _Object, _Agreement),
    violation_of_agreement(_Borrower, _Agreement).

reputational_damage(_Lender, _Harm) <= harm_fact(_Harm, _Lender).

discovery_of_harm(_Lender, _Object, _T_discovery) <=
    discovery_fact(_Lender, _Object, _T_discovery)."#;

pub fn entities() -> EntityMap {
    EntityMap::from_pairs([
        ("Borrower", "The hospital"),
        ("Object", "medical supplies"),
        ("Lender", "the health organization"),
        ("Agreement", "a supply agreement"),
        (
            "Harm",
            "a shortage of supplies during a critical time, affecting patient care",
        ),
        ("T_discovery", "2023/08/20"),
    ])
    .unwrap()
}

pub fn raw_record() -> legal2logic::dataset::RawRecord {
    legal2logic::dataset::RawRecord {
        v: 1,
        id: "lease-worked-example".into(),
        legal_issue: "The borrower's use of the assets in a manner that harms the lender's interests or reputation has damaged the lender's rights and reputation.".into(),
        case_text: CASE_TEXT.into(),
        entities: entities()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        template_text: TEMPLATE_TEXT.into(),
        facts: FACTS_BLOCK.into(),
        rules: RULES_BLOCK.into(),
        contract_type: Some(legal2logic::dataset::ContractType::Lease),
    }
}
