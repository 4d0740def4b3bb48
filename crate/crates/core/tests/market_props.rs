mod common;

use desksim::domain::{EffectiveDate, TradingCalendar, TradingRecord};
use desksim::market::{align_article, build_labels, label_record, LabelError};
use desksim::Decision;
use proptest::prelude::*;

fn record() -> impl Strategy<Value = TradingRecord> {
    (0u64..20, 0u64..5, 0u64..5, 0u32..4).prop_map(|(day, buy, sell, inst)| {
        let (buy, sell) = if inst == 0 { (0, 0) } else { (buy, sell) };
        TradingRecord {
            ticker: "2330".into(),
            trade_date: common::date(day),
            total_buy_volume: buy,
            total_sell_volume: sell,
            institution_count: inst,
        }
    })
}

proptest! {
    #[test]
    fn label_rule_holds(r in record()) {
        match label_record(&r) {
            Ok(Decision::Overweight) => prop_assert!(r.total_buy_volume > r.total_sell_volume),
            Ok(Decision::Underweight) => prop_assert!(r.total_sell_volume > r.total_buy_volume),
            Ok(Decision::Neutral) => prop_assert_eq!(r.institution_count, 0),
            Err(LabelError::AmbiguousLabel { .. }) => {
                prop_assert!(r.institution_count > 0 && r.total_buy_volume == r.total_sell_volume)
            }
        }
    }

    #[test]
    fn labels_partition_untied_records(records in prop::collection::vec(record(), 0..60)) {
        let mut seen = std::collections::HashSet::new();
        let unique: Vec<TradingRecord> = records.into_iter().filter(|r| seen.insert(r.trade_date)).collect();
        let book = build_labels(&unique);
        let counts = book.proportions();
        prop_assert_eq!(counts.iter().sum::<u64>() as usize + book.ambiguous_count(), unique.len());
    }

    #[test]
    fn alignment_is_pure(
        records in prop::collection::vec(record(), 0..40),
        days in prop::collection::btree_set(0u64..25, 1..20),
        published in 0u64..25,
    ) {
        let calendar = TradingCalendar::from_unordered(days.iter().map(|d| common::date(*d)));
        let book = build_labels(&records);
        let a = common::article("x", "2330", common::date(published));
        let first = align_article(&a, &book, &calendar, EffectiveDate::PublicationDay);
        let again = align_article(&a, &build_labels(&records), &calendar.clone(), EffectiveDate::PublicationDay);
        prop_assert_eq!(&first, &again);
        if let Ok(l) = first {
            prop_assert!(l.trade_date > a.published_at);
            prop_assert!(calendar.contains(l.trade_date));
            prop_assert!(calendar.dates().iter().all(|d| *d <= a.published_at || *d >= l.trade_date));
        }
    }
}
