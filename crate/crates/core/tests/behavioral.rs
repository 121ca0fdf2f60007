use phq_core::io::{format_transcript, parse_transcript};
use phq_core::model::{Speaker, TurnRecord};
use phq_core::turns::{behavioral_vector, quantile, Lexicons, Topic, BEHAVIORAL_NAMES};
use proptest::prelude::*;
use std::path::Path;

fn t(start: f64, stop: f64, who: Speaker, text: &str) -> TurnRecord {
    TurnRecord::new(start, stop, who, text).unwrap()
}

fn interview() -> Vec<TurnRecord> {
    use Speaker::*;
    vec![
        t(0.0, 2.0, Agent, "hi i'm ellie thanks for coming in"),
        t(2.5, 3.0, Participant, "hi <laughter>"),
        t(4.0, 6.0, Agent, "have you been diagnosed with depression"),
        t(7.0, 8.0, Participant, "um yes i have"),
        t(9.0, 10.0, Participant, "<sigh> a while ago"),
        t(11.0, 13.0, Agent, "have you ever served in the military"),
        t(13.2, 14.0, Participant, "no never"),
        t(15.0, 17.0, Agent, "have you been diagnosed with ptsd"),
        t(18.5, 19.0, Participant, "<laughter> hard to say"),
    ]
}

#[test]
fn twelve_values_with_hand_computed_parts() {
    let v = behavioral_vector::<f64>(&interview(), &Lexicons::default()).unwrap();
    let values = v.values();
    assert_eq!(values.len(), 12);
    assert_eq!(BEHAVIORAL_NAMES.len(), 12);
    // 2 laughs over 5 participant turns; 1 disfluency ("um") in 16 tokens; 1 sigh
    assert_eq!(values[0], 0.4);
    assert!((values[1] - 100.0 / 16.0).abs() < 1e-12);
    assert_eq!(values[2], 1.0);
    // response times 0.5, 1.0, 0.2, 1.5 -> sorted 0.2 0.5 1.0 1.5
    let q = [0.2 + 0.75 * 0.3, 0.75, 1.0 + 0.25 * 0.5];
    for (a, b) in values[3..6].iter().zip(q) {
        assert!((a - b).abs() < 1e-12);
    }
    // one within-speaker pause of 1.0 s
    assert_eq!(&values[6..9], &[1.0, 1.0, 1.0]);
    // ptsd ambiguous, dep yes, military no
    assert_eq!(v.pdi, [-1, 1, 0]);
    assert_eq!(v.ambiguous, vec![Topic::Ptsd]);
}

#[test]
fn transcript_round_trip() {
    let turns = interview();
    let text = format_transcript(&turns);
    assert_eq!(parse_transcript(&text, Path::new("t.csv")).unwrap(), turns);
}

proptest! {
    #[test]
    fn pdi_values_stay_in_range(answers in prop::collection::vec("(yes|no|maybe|i have|i don't|um)( (yes|no|never|sure))?", 3)) {
        use Speaker::*;
        let turns = vec![
            t(0.0, 1.0, Agent, "do you have ptsd"),
            t(1.5, 2.0, Participant, &answers[0]),
            t(3.0, 4.0, Agent, "were you depressed"),
            t(4.5, 5.0, Participant, &answers[1]),
            t(6.0, 7.0, Agent, "were you in the military"),
            t(7.5, 8.0, Participant, &answers[2]),
        ];
        let v = behavioral_vector::<f64>(&turns, &Lexicons::default()).unwrap();
        prop_assert!(v.pdi.iter().all(|p| [-1, 0, 1].contains(p)));
        prop_assert_eq!(v.values().len(), 12);
    }

    #[test]
    fn quantiles_are_monotone(mut x in prop::collection::vec(0.0f64..30.0, 1..50)) {
        x.sort_by(f64::total_cmp);
        let q: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&p| quantile(&x, p)).collect();
        prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(q[0], x[0]);
        prop_assert_eq!(q[4], x[x.len() - 1]);
    }
}
