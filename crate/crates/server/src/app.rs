use std::collections::BTreeMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::{Body, Bytes};
use axum::extract::connect_info::MockConnectInfo;
use axum::extract::{ConnectInfo, Path, RawQuery, Request, State};
use axum::handler::Handler;
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, NaiveDate, Utc};
use crisiswatch_core::store::MAX_PAGE_SIZE;
use crisiswatch_core::{
    AnalyticsError, Analyzer, Cursor, EngagementWeights, Store, StoreError, TimeRange, TrackingProfile, Tweet,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::auth::{AuthRejection, Authenticator};
use crate::cache::TtlCache;
use crate::config::ServiceConfig;
use crate::error::ApiError;

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const DEFAULT_TRENDING_K: usize = 10;
pub const MAX_TRENDING_K: usize = 100;

/// Shared, read-only view the handlers work against.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store: Arc<Store>,
    profiles: BTreeMap<String, TrackingProfile>,
    analyzer: Analyzer,
    auth: Authenticator,
    cache: TtlCache,
    timeout: Duration,
    weights: EngagementWeights,
}

impl AppState {
    pub fn new(store: Arc<Store>, profiles: Vec<TrackingProfile>, analyzer: Analyzer, config: &ServiceConfig) -> Self {
        let auth = Authenticator::new(&config.api_keys, config.ip_allowlist.clone());
        if auth.allows_all_addresses() {
            tracing::warn!("ip_allowlist is empty: every source address is admitted");
        }
        Self {
            inner: Arc::new(Inner {
                store,
                profiles: profiles.into_iter().map(|p| (p.profile_id().to_owned(), p)).collect(),
                analyzer,
                auth,
                cache: TtlCache::new(config.cache_ttl),
                timeout: config.request_timeout,
                weights: EngagementWeights::default(),
            }),
        }
    }

    fn profile(&self, id: &str) -> Result<&TrackingProfile, ApiError> {
        self.inner.profiles.get(id).ok_or_else(|| ApiError::unknown_profile(id))
    }
}

/// The full route table with auth, timeout and optional CORS layers.
pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/profiles", get(get_profiles))
        .route("/profiles/{id}/tweets", get(get_tweets))
        .route("/profiles/{id}/sentiment", get(get_sentiment))
        .route("/profiles/{id}/overview", get(get_overview))
        .route("/profiles/{id}/weekly", get(get_weekly))
        .route("/profiles/{id}/trending", get(get_trending))
        .route("/profiles/{id}/stats", get(get_stats))
        .fallback(not_found)
        .layer(middleware::from_fn_with_state(state.clone(), authenticate));
    let open = Router::new().route("/healthz", get(healthz));
    let mut app = Router::new()
        .nest("/api/v1", open.clone().merge(api))
        .merge(open)
        .fallback(not_found.layer(middleware::from_fn_with_state(state.clone(), authenticate)))
        .layer(middleware::from_fn_with_state(state.clone(), deadline))
        .with_state(state);
    if !config.cors_origins.is_empty() {
        let origins: Vec<HeaderValue> = config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
        app = app.layer(
            CorsLayer::new()
                .allow_origin(AllowOrigin::list(origins))
                .allow_methods([Method::GET])
                .allow_headers([header::AUTHORIZATION, header::CONTENT_TYPE]),
        );
    }
    app
}

/// Serves `app` until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app.into_make_service_with_connect_info::<SocketAddr>())
        .with_graceful_shutdown(shutdown)
        .await
}

async fn authenticate(State(state): State<AppState>, mut req: Request, next: Next) -> Response {
    let started = Instant::now();
    let ext = req.extensions();
    let ip = ext
        .get::<ConnectInfo<SocketAddr>>()
        .map(|c| c.0.ip())
        .or_else(|| ext.get::<MockConnectInfo<SocketAddr>>().map(|c| c.0.ip()))
        .unwrap_or(std::net::IpAddr::V4(std::net::Ipv4Addr::UNSPECIFIED));
    let header = req.headers().get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
    let principal = match state.inner.auth.authenticate(header, ip) {
        Ok(p) => p,
        Err(AuthRejection::Unauthenticated) => {
            tracing::info!(%ip, path = %req.uri().path(), "rejected: no valid key");
            return ApiError::unauthorized().into_response();
        }
        Err(AuthRejection::Forbidden) => {
            tracing::info!(%ip, path = %req.uri().path(), "rejected: address not allowed");
            return ApiError::forbidden().into_response();
        }
    };
    let path = req.uri().path().to_owned();
    req.extensions_mut().insert(principal.clone());
    let resp = next.run(req).await;
    tracing::info!(
        key_id = %principal.key_id,
        ip = %principal.source_ip,
        %path,
        status = resp.status().as_u16(),
        elapsed_ms = started.elapsed().as_millis() as u64,
        "request"
    );
    resp
}

async fn deadline(State(state): State<AppState>, req: Request, next: Next) -> Response {
    match tokio::time::timeout(state.inner.timeout, next.run(req)).await {
        Ok(resp) => resp,
        Err(_) => ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "timeout",
            "request exceeded the time limit",
        )
        .into_response(),
    }
}

async fn not_found(uri: Uri) -> ApiError {
    ApiError::new(
        StatusCode::NOT_FOUND,
        "not_found",
        format!("no route for {}", uri.path()),
    )
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
}

async fn healthz() -> Response {
    json_response(&Health { status: "ok" })
}

fn json_bytes<T: Serialize>(value: &T) -> Bytes {
    Bytes::from(serde_json::to_vec(value).expect("response serializes"))
}

fn json_body(body: Bytes) -> Response {
    let mut resp = Response::new(Body::from(body));
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    resp
}

fn json_response<T: Serialize>(value: &T) -> Response {
    json_body(json_bytes(value))
}

/// Query parsing that rejects unknown and malformed parameters with 400.
fn parse_query<T: DeserializeOwned>(raw: &Option<String>) -> Result<T, ApiError> {
    serde_urlencoded::from_str(raw.as_deref().unwrap_or(""))
        .map_err(|e| ApiError::bad_request("invalid_query", e.to_string()))
}

/// Runs blocking analytics off the async workers, serving repeat requests
/// for the same path and query from the TTL cache.
async fn cached<F>(state: &AppState, key: String, compute: F) -> Result<Response, ApiError>
where
    F: FnOnce(&AppState) -> Result<Bytes, ApiError> + Send + 'static,
{
    if let Some(body) = state.inner.cache.get(&key) {
        return Ok(json_body(body));
    }
    let st = state.clone();
    let body = tokio::task::spawn_blocking(move || compute(&st))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    state.inner.cache.put(key, body.clone());
    Ok(json_body(body))
}

fn cache_key(kind: &str, id: &str, raw: &Option<String>) -> String {
    let mut pairs: Vec<&str> = raw
        .as_deref()
        .unwrap_or("")
        .split('&')
        .filter(|s| !s.is_empty())
        .collect();
    pairs.sort_unstable();
    format!("{kind}/{id}?{}", pairs.join("&"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowQuery {
    from: Option<String>,
    to: Option<String>,
}

fn parse_instant(name: &str, s: &str) -> Result<DateTime<Utc>, ApiError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| ApiError::bad_request("invalid_range", format!("{name}: {e}")))
}

/// `from`/`to` with each missing bound taken from the crisis window.
fn window(profile: &TrackingProfile, from: &Option<String>, to: &Option<String>) -> Result<TimeRange, ApiError> {
    let crisis = profile.crisis_window();
    let start = from
        .as_deref()
        .map(|s| parse_instant("from", s))
        .transpose()?
        .unwrap_or(crisis.start());
    let end = to
        .as_deref()
        .map(|s| parse_instant("to", s))
        .transpose()?
        .unwrap_or(crisis.end());
    TimeRange::new(start, end).map_err(|e| ApiError::bad_request("invalid_range", e.to_string()))
}

fn analytics_error(e: AnalyticsError) -> ApiError {
    let code = match e {
        AnalyticsError::OutsideCrisisWindow { .. } => "invalid_range",
        AnalyticsError::DateOutsideWindow { .. } => "date_outside_window",
        AnalyticsError::InvalidK => "invalid_k",
    };
    ApiError::bad_request(code, e.to_string())
}

#[derive(Serialize)]
struct ProfileSummary<'a> {
    profile_id: &'a str,
    name: &'a str,
    crisis_window: TimeRange,
    active: bool,
    terms: Vec<String>,
}

async fn get_profiles(State(state): State<AppState>, RawQuery(raw): RawQuery) -> Result<Response, ApiError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct NoParams {}
    parse_query::<NoParams>(&raw)?;
    let list: Vec<ProfileSummary> = state
        .inner
        .profiles
        .values()
        .map(|p| ProfileSummary {
            profile_id: p.profile_id(),
            name: p.name(),
            crisis_window: p.crisis_window(),
            active: p.is_active(),
            terms: p.terms().iter().map(ToString::to_string).collect(),
        })
        .collect();
    Ok(json_response(&list))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TweetsQuery {
    from: Option<String>,
    to: Option<String>,
    cursor: Option<String>,
    page_size: Option<usize>,
}

#[derive(Serialize)]
struct TweetPage<'a> {
    items: Vec<&'a Tweet>,
    next_cursor: Option<String>,
}

async fn get_tweets(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: TweetsQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?;
    let range = window(profile, &q.from, &q.to)?;
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if !(1..=MAX_PAGE_SIZE).contains(&page_size) {
        return Err(ApiError::bad_request(
            "invalid_page_size",
            format!("page_size must be between 1 and {MAX_PAGE_SIZE}"),
        ));
    }
    let cursor = q
        .cursor
        .as_deref()
        .map(str::parse::<Cursor>)
        .transpose()
        .map_err(|e| ApiError::bad_request("invalid_cursor", e.to_string()))?;
    let st = state.clone();
    let body = tokio::task::spawn_blocking(move || {
        let page = st
            .inner
            .store
            .query(&id, range, cursor.as_ref(), page_size)
            .map_err(|e| match e {
                StoreError::InvalidCursor => ApiError::bad_request("invalid_cursor", e.to_string()),
                other => ApiError::internal(other.to_string()),
            })?;
        Ok::<_, ApiError>(json_bytes(&TweetPage {
            items: page.items.iter().map(AsRef::as_ref).collect(),
            next_cursor: page.next_cursor.map(|c| c.to_string()),
        }))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(json_body(body))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SentimentQuery {
    granularity: Option<String>,
    from: Option<String>,
    to: Option<String>,
}

#[derive(Serialize)]
struct DailySentiment<'a> {
    granularity: &'static str,
    window: TimeRange,
    points: &'a [crisiswatch_core::SentimentSeriesPoint],
}

#[derive(Serialize)]
struct CrisisSentiment<'a> {
    granularity: &'static str,
    window: TimeRange,
    summary: &'a crisiswatch_core::SentimentSeriesPoint,
}

async fn get_sentiment(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: SentimentQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?.clone();
    let range = window(&profile, &q.from, &q.to)?;
    let daily = match q.granularity.as_deref().unwrap_or("daily") {
        "daily" => true,
        "crisis" => false,
        other => {
            return Err(ApiError::bad_request(
                "invalid_granularity",
                format!("granularity must be daily or crisis, not {other:?}"),
            ))
        }
    };
    cached(&state, cache_key("sentiment", &id, &raw), move |st| {
        let (store, an) = (&st.inner.store, &st.inner.analyzer);
        if daily {
            let points = an.sentiment_series(store, &profile, range).map_err(analytics_error)?;
            Ok(json_bytes(&DailySentiment {
                granularity: "daily",
                window: range,
                points: &points,
            }))
        } else {
            let clipped = range.intersect(&profile.crisis_window());
            let summary = an.window_sentiment(store, &profile, range);
            Ok(json_bytes(&CrisisSentiment {
                granularity: "crisis",
                window: clipped,
                summary: &summary,
            }))
        }
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OverviewQuery {
    date: Option<String>,
}

async fn get_overview(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: OverviewQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?.clone();
    let date = q
        .date
        .as_deref()
        .ok_or_else(|| ApiError::bad_request("invalid_query", "date is required"))?;
    let date = NaiveDate::parse_from_str(date, "%Y-%m-%d")
        .map_err(|e| ApiError::bad_request("invalid_date", format!("date must be YYYY-MM-DD: {e}")))?;
    cached(&state, cache_key("overview", &id, &raw), move |st| {
        let day = st
            .inner
            .analyzer
            .daily_overview(&st.inner.store, &profile, date)
            .map_err(analytics_error)?;
        Ok(json_bytes(&day))
    })
    .await
}

async fn get_weekly(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: WindowQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?.clone();
    let range = window(&profile, &q.from, &q.to)?;
    cached(&state, cache_key("weekly", &id, &raw), move |st| {
        Ok(json_bytes(&st.inner.analyzer.weekly_counts(
            &st.inner.store,
            &profile,
            range,
        )))
    })
    .await
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrendingQuery {
    k: Option<String>,
    from: Option<String>,
    to: Option<String>,
}

#[derive(Serialize)]
struct TrendingItem<'a> {
    rank: u32,
    tweet_id: &'a str,
    engagement: f64,
    tweet: &'a Tweet,
}

async fn get_trending(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: TrendingQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?.clone();
    let range = window(&profile, &q.from, &q.to)?;
    let k = match q.k.as_deref() {
        None => DEFAULT_TRENDING_K,
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|k| (1..=MAX_TRENDING_K).contains(k))
            .ok_or_else(|| {
                ApiError::bad_request("invalid_k", format!("k must be an integer in 1..={MAX_TRENDING_K}"))
            })?,
    };
    cached(&state, cache_key("trending", &id, &raw), move |st| {
        let ranked = st
            .inner
            .analyzer
            .trending_tweets(&st.inner.store, &profile, range, k, &st.inner.weights)
            .map_err(analytics_error)?;
        let items: Vec<TrendingItem> = ranked
            .iter()
            .map(|(e, t)| TrendingItem {
                rank: e.rank(),
                tweet_id: e.tweet_id(),
                engagement: e.engagement(),
                tweet: t,
            })
            .collect();
        Ok(json_bytes(&items))
    })
    .await
}

async fn get_stats(
    State(state): State<AppState>,
    Path(id): Path<String>,
    RawQuery(raw): RawQuery,
) -> Result<Response, ApiError> {
    let q: WindowQuery = parse_query(&raw)?;
    let profile = state.profile(&id)?.clone();
    let range = window(&profile, &q.from, &q.to)?;
    cached(&state, cache_key("stats", &id, &raw), move |st| {
        Ok(json_bytes(&st.inner.analyzer.descriptive_stats(
            &st.inner.store,
            &profile,
            range,
        )))
    })
    .await
}
