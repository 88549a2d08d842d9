use retrace_core::reports::{descriptive_report, MentionDenominator, ReportError, ReportOptions};
use retrace_core::synthetic::{period_totals_fixture, report_fixture};

#[path = "support/report_oracle.rs"]
mod report_oracle;

use report_oracle::{oracle, pct};

#[test]
fn report_matches_brute_force_tally() {
    let snap = report_fixture();
    let report = descriptive_report(&snap, &ReportOptions::default()).unwrap();
    let o = oracle(&snap);
    for (table, expected) in [
        (&report.citing_by_period_and_discipline, &o.disciplines),
        (&report.subject_area_distribution_per_period, &o.areas),
    ] {
        for ps in &table.periods {
            let exp = &expected[ps.period.label()];
            let den: u64 = exp.values().sum();
            assert_eq!(ps.citations, o.citations[ps.period.label()]);
            assert_eq!(ps.denominator, den);
            assert_eq!(ps.rows.keys().collect::<Vec<_>>(), exp.keys().collect::<Vec<_>>());
            for (k, share) in &ps.rows {
                assert_eq!(share.count, exp[k]);
                assert!((share.percent - pct(exp[k], den)).abs() < 0.01);
            }
        }
    }
    let in_text = &report.in_text_by_intent_section_sentiment;
    assert_eq!(in_text.without_period, 0);
    for p in &in_text.periods {
        for (rows, exp) in [(&p.by_intent, &o.intents), (&p.by_section, &o.sections)] {
            let exp = exp.get(p.period.label()).cloned().unwrap_or_default();
            assert_eq!(rows.len(), exp.len());
            for (k, row) in rows {
                assert_eq!(row.sentiment, exp[k]);
            }
        }
    }
    assert_eq!(report.retraction_mention_rate.share.count, o.mention.0);
    assert_eq!(report.retraction_mention_rate.share.denominator, o.mention.1);
    assert_eq!(
        (report.fulltext_unavailable_rate.count, report.fulltext_unavailable_rate.denominator),
        o.unavailable
    );
    let fifths: u64 = report.fifth_histograms.iter().flat_map(|h| &h.bins).map(|b| b.count).sum();
    assert_eq!(fifths, o.citations.values().sum::<u64>());
}

#[test]
fn humanities_shares_render_like_the_published_table() {
    let report = descriptive_report(&report_fixture(), &ReportOptions::default()).unwrap();
    let shown: Vec<&str> = report
        .subject_area_distribution_per_period
        .periods
        .iter()
        .map(|p| p.rows["Arts and Humanities"].display.as_str())
        .collect();
    assert_eq!(shown, ["22.94", "18.42", "18.14"]);
    assert_eq!(report.retraction_mention_rate.share.display, "2.25");
    assert_eq!(report.retraction_mention_rate.share.count, 5);
    assert_eq!(report.retraction_mention_rate.share.denominator, 222);
}

#[test]
fn full_text_denominator_excludes_paywalled_entities() {
    let snap = report_fixture();
    let opts = ReportOptions { mention_denominator: MentionDenominator::FullTextOnly };
    let report = descriptive_report(&snap, &opts).unwrap();
    assert_eq!(report.retraction_mention_rate.share.denominator, 222 - 8);
    assert_eq!(report.retraction_mention_rate.share.count, 5);
}

#[test]
fn period_totals_fixture_counts() {
    let report = descriptive_report(&period_totals_fixture(), &ReportOptions::default()).unwrap();
    let t = &report.totals;
    assert_eq!((t.per_period["P-Pre"], t.per_period["P-Ret"], t.per_period["P-Post"]), (192, 94, 260));
    assert_eq!(report.fulltext_unavailable_rate.count, 46);
    assert_eq!(report.fulltext_unavailable_rate.display, "8.42");
}

#[test]
fn missing_periods_are_reported() {
    let mut snap = report_fixture();
    snap.periods.clear();
    let err = descriptive_report(&snap, &ReportOptions::default()).unwrap_err();
    assert!(matches!(err, ReportError::PeriodsMissing));
    assert!(err.to_string().contains("periods missing"));
}
