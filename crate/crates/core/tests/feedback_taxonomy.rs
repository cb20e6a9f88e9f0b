mod common;

use common::{taxonomy_cases, taxonomy_gaps};
use robocollab::feedback::{render_feedback, PickFailure};
use robocollab::Feedback;

#[test]
fn every_outcome_is_produced_by_some_world_state() {
    let (missing, mismatched) = taxonomy_gaps();
    assert!(mismatched.is_empty(), "{mismatched:#?}");
    assert!(missing.is_empty(), "never produced: {missing:?}");
}

#[test]
fn mobile_too_far_reports_offsets_to_two_decimals() {
    let case = taxonomy_cases()
        .into_iter()
        .find(|c| c.expected == "pick_failed/too_far#offset")
        .unwrap();
    let Feedback::PickFailed {
        reason: PickFailure::TooFar { distance, dx, dy },
        ..
    } = &case.feedback
    else {
        panic!("{:?}", case.feedback);
    };
    // alice at (3.5, 3.5), phone at (4.7, 1.5)
    assert!((distance - 1.2f64.hypot(2.0)).abs() < 1e-9);
    assert!((dx.unwrap() - 1.2).abs() < 1e-9);
    assert!((dy.unwrap() + 2.0).abs() < 1e-9);
    let text = render_feedback(&case.feedback);
    assert!(text.contains("2.33 m"), "{text}");
    assert!(text.contains("dx = 1.20 m, dy = -2.00 m"), "{text}");
}

#[test]
fn fixed_base_too_far_carries_no_offset() {
    let case = taxonomy_cases()
        .into_iter()
        .find(|c| c.expected == "pick_failed/too_far")
        .unwrap();
    let text = render_feedback(&case.feedback);
    assert!(!text.contains("dx ="), "{text}");
}

#[test]
fn renderings_are_single_nonempty_lines() {
    for c in taxonomy_cases() {
        let text = render_feedback(&c.feedback);
        assert!(!text.trim().is_empty(), "{}", c.name);
        assert!(!text.contains('\n'), "{}: {text}", c.name);
    }
}
