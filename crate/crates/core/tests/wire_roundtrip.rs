use chrono::{TimeZone, Utc};
use crisiswatch_core::wire::{validate_tweet, RawRecord, WireRecord};
use crisiswatch_core::{Tweet, TweetParts};
use proptest::prelude::*;

fn parts() -> impl Strategy<Value = TweetParts> {
    (
        "[a-z0-9]{1,12}",
        -2_000_000_000i64..4_000_000_000,
        "[a-z0-9]{1,8}",
        "@?[A-Za-z_][A-Za-z0-9_]{0,14}",
        "[ -~\u{e9}\u{4e2d}\u{1f637}]{0,80}",
        any::<u32>(),
        any::<u32>(),
        proptest::option::of("[a-z0-9]{1,12}"),
    )
        .prop_map(|(id, secs, author, handle, text, likes, rts, rt_of)| TweetParts {
            retweet_of: rt_of.filter(|r| *r != id),
            tweet_id: id,
            created_at: Utc.timestamp_opt(secs, 0).unwrap(),
            author_id: author,
            author_handle: handle,
            text,
            like_count: u64::from(likes),
            retweet_count: u64::from(rts),
        })
}

proptest! {
    #[test]
    fn wire_line_round_trips(p in parts()) {
        let tweet = Tweet::new(p).unwrap();
        let line = WireRecord::from(&tweet).to_line();
        prop_assert!(!line.contains('\n'));
        let back = validate_tweet(&RawRecord::parse(1, &line)).unwrap();
        prop_assert_eq!(&back, &tweet);
        prop_assert_eq!(WireRecord::from(&back).to_line(), line);
    }

    #[test]
    fn stored_form_round_trips(p in parts()) {
        let tweet = Tweet::new(p).unwrap();
        let json = serde_json::to_string(&tweet).unwrap();
        let back: Tweet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, tweet);
    }
}
