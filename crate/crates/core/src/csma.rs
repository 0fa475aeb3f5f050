//! Carrier-sense multiple access with collision avoidance, with and
//! without virtual carrier sensing.
//!
//! Both models follow the same skeleton. `Main` waits for a packet from
//! the network layer or serves an incoming data frame (deliver, wait one
//! short interframe space, acknowledge). `Init` gives up after
//! `max_retransmit` attempts, otherwise derives the contention window for
//! the current attempt and starts channel assessment. Assessment waits for
//! an idle medium, lets the distributed interframe space pass (restarting
//! whenever the medium turns busy), then draws a backoff uniformly from
//! the window and counts it down one idle slot at a time; a busy slot
//! suspends the countdown and goes back to listening with the remaining
//! backoff intact, so interrupted waiting is never repeated. After the
//! frame goes out, `AckWait` serves incoming data frames, accepts an
//! acknowledgement only from the frame's addressee, and on timeout retries
//! with the attempt counter bumped.
//!
//! The virtual-carrier-sensing variant brokers the medium with
//! request/clear handshakes. Requests and clears overheard on their way to
//! someone else push the local allocation deadline `nav` to the end of the
//! announced exchange, and a node neither contends nor answers requests
//! before `nav` has passed. A request addressed to the node is answered
//! after one short interframe space provided the medium stayed free and
//! `nav` allows it; the clear's silence period is the request's minus the
//! time already elapsed. Once a handshake concludes, data and
//! acknowledgement proceed regardless of `nav`.

use serde::{Deserialize, Serialize};

use crate::builder::*;
use crate::data::{dur, DurationConfig, Message, NodeId, Payload, Time};
use crate::defs::{CompiledDefs, DefsBuilder};
use crate::error::ModelError;
use crate::expr::{Expr, VarType};

/// Protocol constants. The interframe spaces are in slots; the contention
/// window for attempt `k` is `cwmin * 2^k`, optionally capped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsmaParams {
    pub cwmin: i64,
    pub cwmax: Option<i64>,
    /// Total attempts allowed per frame; `None` retries forever.
    pub max_retransmit: Option<u32>,
    pub sifs: Time,
    pub difs: Time,
    /// How long to wait for a clear after a request; defaults to
    /// `sifs + durations.cts`, the exact arrival slot of a prompt clear.
    pub max_cts_wait: Option<Time>,
    /// How long to wait for an acknowledgement after a data frame;
    /// defaults to `sifs + durations.ack`.
    pub max_ack_wait: Option<Time>,
    pub durations: DurationConfig,
}

impl Default for CsmaParams {
    fn default() -> Self {
        CsmaParams {
            cwmin: 2,
            cwmax: None,
            max_retransmit: Some(2),
            sifs: 1,
            difs: 2,
            max_cts_wait: None,
            max_ack_wait: None,
            durations: DurationConfig::default(),
        }
    }
}

impl CsmaParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.durations.validate()?;
        if self.cwmin < 1 {
            return Err(ModelError::InvalidParams("cwmin must be positive".into()));
        }
        if let Some(cap) = self.cwmax {
            if cap < self.cwmin {
                return Err(ModelError::InvalidParams("cwmax below cwmin".into()));
            }
        }
        if self.sifs < 1 {
            return Err(ModelError::InvalidParams("sifs must be at least one slot".into()));
        }
        if self.difs <= self.sifs {
            return Err(ModelError::InvalidParams(
                "difs must exceed sifs so acknowledgements keep priority".into(),
            ));
        }
        if let Some(k) = self.max_retransmit {
            if k > 32 {
                return Err(ModelError::InvalidParams("max_retransmit above 32".into()));
            }
        }
        Ok(())
    }

    pub fn cts_wait(&self) -> Time {
        self.max_cts_wait.unwrap_or(self.sifs + self.durations.cts)
    }

    pub fn ack_wait(&self) -> Time {
        self.max_ack_wait.unwrap_or(self.sifs + self.durations.ack)
    }
}

/// Contention window for the given attempt number.
pub fn cw_of(backoffexp: u32, params: &CsmaParams) -> i64 {
    let raw = params.cwmin << backoffexp.min(62);
    match params.cwmax {
        Some(cap) => raw.min(cap),
        None => raw,
    }
}

/// Silence period announced in a request: the time from the request's last
/// slot until the acknowledgement of the data frame would complete.
pub fn rts_duration(data: Payload, src: NodeId, dest: NodeId, params: &CsmaParams) -> Time {
    let frame = Message::Data { data, src, dest };
    params.sifs
        + params.durations.cts
        + params.sifs
        + dur(&frame, &params.durations)
        + params.sifs
        + params.durations.ack
}

fn declare_common(b: &mut DefsBuilder) {
    b.var("myip", VarType::Id);
    b.var("data", VarType::Data);
    b.var("dest", VarType::Id);
    b.var("source", VarType::Id);
    b.var("frm", VarType::Msg);
    b.var("be", VarType::Int);
    b.var("cw", VarType::Int);
    b.var("bo", VarType::Int);
    b.var("t", VarType::AbsTime);
    b.var("dl", VarType::AbsTime);
}

// deliver the payload, let one short interframe space pass, acknowledge
// the sender, then continue as `ret`.
fn serve_data(sifs: Time, ret: SeqExpr) -> SeqExpr {
    guard(
        fresh(dataframe(var("data"), var("source"), var("myip"))),
        deliver(
            var("data"),
            assign(
                "t",
                add(now(), ilit(sifs)),
                guard(
                    ge(now(), var("t")),
                    transmit(ackframe(var("myip"), var("source")), ret),
                ),
            ),
        ),
    )
}

// Contention window expression for the current attempt counter.
fn cw_expr(params: &CsmaParams) -> Expr<String> {
    let raw = mul(ilit(params.cwmin), pow2(var("be")));
    match params.cwmax {
        Some(cap) => emin(raw, ilit(cap)),
        None => raw,
    }
}

// Attempt-limit split of `Init`: either contend, or report failure and
// return to the entry point.
fn init_body(params: &CsmaParams, contend: SeqExpr, restart: SeqExpr) -> SeqExpr {
    match params.max_retransmit {
        Some(k) => choice(
            guard(lt(var("be"), ilit(k as i64)), contend),
            guard(
                ge(var("be"), ilit(k as i64)),
                deliver(data_lit(Payload::TxFailure), restart),
            ),
        ),
        None => contend,
    }
}

/// The plain carrier-sensing protocol. Entry process: `Main(myip)`.
pub fn build_csma_defs(params: &CsmaParams) -> Result<CompiledDefs, ModelError> {
    params.validate()?;
    let sifs = params.sifs;
    let difs = params.difs;

    let mut b = DefsBuilder::new();
    declare_common(&mut b);

    b.proc(
        "Main",
        &["myip"],
        choice_all([
            newpkt(
                "data",
                "dest",
                call(
                    "Init",
                    vec![var("myip"), dataframe(var("data"), var("myip"), var("dest")), ilit(0)],
                ),
            ),
            serve_data(sifs, call("Main", vec![var("myip")])),
        ]),
    );

    b.proc(
        "Init",
        &["myip", "frm", "be"],
        init_body(
            params,
            assign(
                "cw",
                cw_expr(params),
                call("Cca", vec![var("myip"), var("frm"), var("be"), var("cw")]),
            ),
            call("Main", vec![var("myip")]),
        ),
    );

    let cca_args = vec![var("myip"), var("frm"), var("be"), var("cw")];
    b.proc(
        "Cca",
        &["myip", "frm", "be", "cw"],
        choice_all([
            serve_data(sifs, call("Cca", cca_args.clone())),
            guard(
                medium_idle(),
                assign(
                    "t",
                    add(now(), ilit(difs)),
                    call("CcaDifs", vec![var("myip"), var("frm"), var("be"), var("cw"), var("t")]),
                ),
            ),
        ]),
    );

    b.proc(
        "CcaDifs",
        &["myip", "frm", "be", "cw", "t"],
        choice_all([
            guard(medium_idle().not(), call("Cca", cca_args.clone())),
            guard(
                medium_idle().and(ge(now(), var("t"))),
                prob_choice(
                    "bo",
                    sub(var("cw"), ilit(1)),
                    call("Backoff", vec![var("myip"), var("frm"), var("be"), var("bo")]),
                ),
            ),
        ]),
    );

    b.proc(
        "Backoff",
        &["myip", "frm", "be", "bo"],
        choice_all([
            guard(
                eq(var("bo"), ilit(0)),
                transmit(
                    var("frm"),
                    assign(
                        "dl",
                        add(now(), ilit(params.ack_wait())),
                        call("AckWait", vec![var("myip"), var("frm"), var("be"), var("dl")]),
                    ),
                ),
            ),
            guard(
                gt(var("bo"), ilit(0)),
                assign(
                    "t",
                    now(),
                    call(
                        "BackoffSlot",
                        vec![var("myip"), var("frm"), var("be"), var("bo"), var("t")],
                    ),
                ),
            ),
        ]),
    );

    // Exactly one slot passes per countdown round; only idle slots count,
    // a busy slot suspends with the remaining backoff.
    b.proc(
        "BackoffSlot",
        &["myip", "frm", "be", "bo", "t"],
        choice_all([
            guard(
                gt(now(), var("t")).and(medium_idle()),
                call(
                    "Backoff",
                    vec![var("myip"), var("frm"), var("be"), sub(var("bo"), ilit(1))],
                ),
            ),
            guard(
                gt(now(), var("t")).and(medium_idle().not()),
                call("CcaResume", vec![var("myip"), var("frm"), var("be"), var("bo")]),
            ),
        ]),
    );

    let resume_args = vec![var("myip"), var("frm"), var("be"), var("bo")];
    b.proc(
        "CcaResume",
        &["myip", "frm", "be", "bo"],
        choice_all([
            serve_data(sifs, call("CcaResume", resume_args.clone())),
            guard(
                medium_idle(),
                assign(
                    "t",
                    add(now(), ilit(difs)),
                    call(
                        "CcaResumeDifs",
                        vec![var("myip"), var("frm"), var("be"), var("bo"), var("t")],
                    ),
                ),
            ),
        ]),
    );

    b.proc(
        "CcaResumeDifs",
        &["myip", "frm", "be", "bo", "t"],
        choice_all([
            guard(medium_idle().not(), call("CcaResume", resume_args.clone())),
            guard(
                medium_idle().and(ge(now(), var("t"))),
                call("Backoff", vec![var("myip"), var("frm"), var("be"), var("bo")]),
            ),
        ]),
    );

    b.proc(
        "AckWait",
        &["myip", "frm", "be", "dl"],
        choice_all([
            serve_data(
                sifs,
                call("AckWait", vec![var("myip"), var("frm"), var("be"), var("dl")]),
            ),
            guard(
                fresh(ackframe(msg_dest(var("frm")), var("myip"))),
                deliver(data_lit(Payload::TxSuccess), call("Main", vec![var("myip")])),
            ),
            guard(
                gt(now(), var("dl")),
                call("Init", vec![var("myip"), var("frm"), add(var("be"), ilit(1))]),
            ),
        ]),
    );

    b.compile()
}

/// The virtual-carrier-sensing variant. Entry process: `Main(myip, nav)`
/// with `nav` initially the current time.
pub fn build_csma_rts_defs(params: &CsmaParams) -> Result<CompiledDefs, ModelError> {
    params.validate()?;
    let sifs = params.sifs;
    let difs = params.difs;
    let dur_cts = params.durations.cts;

    let mut b = DefsBuilder::new();
    declare_common(&mut b);
    b.var("nav", VarType::AbsTime);
    b.var("d", VarType::Int);
    b.var("d2", VarType::Int);
    b.var("rdst", VarType::Id);

    // Overheard request/clear for someone else: extend the allocation
    // deadline to the end of the announced exchange. The update fires only
    // when it actually extends the deadline; the branch is otherwise
    // passive, so a frame is processed once per slot rather than forever.
    let overhear = |frame: fn(Expr<String>, Expr<String>, Expr<String>) -> Expr<String>,
                    ret: SeqExpr| {
        guard(
            fresh(frame(var("source"), var("rdst"), var("d")))
                .and(ne(var("rdst"), var("myip")))
                .and(lt(var("nav"), add(now(), var("d")))),
            assign("nav", emax(var("nav"), add(now(), var("d"))), ret),
        )
    };

    // A request addressed to this node, answerable only after `nav`.
    let answer_request = |reply_proc: &str, extra: Vec<Expr<String>>| {
        let mut args = vec![var("myip")];
        args.extend(extra);
        args.extend([var("source"), var("d"), var("t")]);
        guard(
            fresh(rtsframe(var("source"), var("myip"), var("d"))).and(gt(now(), var("nav"))),
            assign("t", add(now(), ilit(sifs)), call(reply_proc, args)),
        )
    };

    // Send the clear after a free short interframe space; the announced
    // silence shrinks by the gap and the clear's own transmission time.
    // The first slot does not count as busy: it still carries the request.
    let reply_body = |ret: SeqExpr, ret2: SeqExpr| {
        choice_all([
            guard(
                medium_idle().not().and(gt(now(), sub(var("t"), ilit(sifs)))),
                ret,
            ),
            guard(
                medium_idle().and(ge(now(), var("t"))),
                assign(
                    "d2",
                    sub(sub(var("d"), ilit(sifs)), ilit(dur_cts)),
                    transmit(
                        ctsframe(var("myip"), var("source"), var("d2")),
                        assign("nav", add(now(), var("d2")), ret2),
                    ),
                ),
            ),
        ])
    };

    let main_args = vec![var("myip"), var("nav")];
    b.proc(
        "Main",
        &["myip", "nav"],
        choice_all([
            newpkt(
                "data",
                "dest",
                call(
                    "Init",
                    vec![
                        var("myip"),
                        dataframe(var("data"), var("myip"), var("dest")),
                        var("dest"),
                        ilit(0),
                        var("nav"),
                    ],
                ),
            ),
            serve_data(sifs, call("Main", main_args.clone())),
            overhear(rtsframe, call("Main", main_args.clone())),
            overhear(ctsframe, call("Main", main_args.clone())),
            answer_request("CtsReply", vec![var("nav")]),
        ]),
    );

    b.proc(
        "CtsReply",
        &["myip", "nav", "source", "d", "t"],
        reply_body(
            call("Main", main_args.clone()),
            call("Main", main_args.clone()),
        ),
    );

    b.proc(
        "Init",
        &["myip", "frm", "dest", "be", "nav"],
        init_body(
            params,
            assign(
                "cw",
                cw_expr(params),
                call(
                    "Cca",
                    vec![var("myip"), var("frm"), var("dest"), var("be"), var("cw"), var("nav")],
                ),
            ),
            call("Main", main_args.clone()),
        ),
    );

    let cca_args = vec![
        var("myip"),
        var("frm"),
        var("dest"),
        var("be"),
        var("cw"),
        var("nav"),
    ];
    b.proc(
        "Cca",
        &["myip", "frm", "dest", "be", "cw", "nav"],
        choice_all([
            serve_data(sifs, call("Cca", cca_args.clone())),
            overhear(rtsframe, call("Cca", cca_args.clone())),
            overhear(ctsframe, call("Cca", cca_args.clone())),
            answer_request(
                "CtsReplyCca",
                vec![var("frm"), var("dest"), var("be"), var("cw"), var("nav")],
            ),
            guard(
                medium_idle().and(gt(now(), var("nav"))),
                assign(
                    "t",
                    add(now(), ilit(difs)),
                    call(
                        "CcaDifs",
                        vec![
                            var("myip"),
                            var("frm"),
                            var("dest"),
                            var("be"),
                            var("cw"),
                            var("nav"),
                            var("t"),
                        ],
                    ),
                ),
            ),
        ]),
    );

    b.proc(
        "CtsReplyCca",
        &["myip", "frm", "dest", "be", "cw", "nav", "source", "d", "t"],
        reply_body(call("Cca", cca_args.clone()), call("Cca", cca_args.clone())),
    );

    b.proc(
        "CcaDifs",
        &["myip", "frm", "dest", "be", "cw", "nav", "t"],
        choice_all([
            guard(medium_idle().not(), call("Cca", cca_args.clone())),
            guard(
                medium_idle().and(ge(now(), var("t"))),
                prob_choice(
                    "bo",
                    sub(var("cw"), ilit(1)),
                    call(
                        "Backoff",
                        vec![
                            var("myip"),
                            var("frm"),
                            var("dest"),
                            var("be"),
                            var("bo"),
                            var("nav"),
                        ],
                    ),
                ),
            ),
        ]),
    );

    b.proc(
        "Backoff",
        &["myip", "frm", "dest", "be", "bo", "nav"],
        choice_all([
            guard(
                eq(var("bo"), ilit(0)),
                assign(
                    "d",
                    add(
                        add(
                            add(
                                add(add(ilit(sifs), ilit(dur_cts)), ilit(sifs)),
                                dur_of(var("frm")),
                            ),
                            ilit(sifs),
                        ),
                        ilit(params.durations.ack),
                    ),
                    transmit(
                        rtsframe(var("myip"), var("dest"), var("d")),
                        assign(
                            "dl",
                            add(now(), ilit(params.cts_wait())),
                            call(
                                "CtsWait",
                                vec![
                                    var("myip"),
                                    var("frm"),
                                    var("dest"),
                                    var("be"),
                                    var("nav"),
                                    var("dl"),
                                ],
                            ),
                        ),
                    ),
                ),
            ),
            guard(
                gt(var("bo"), ilit(0)),
                assign(
                    "t",
                    now(),
                    call(
                        "BackoffSlot",
                        vec![
                            var("myip"),
                            var("frm"),
                            var("dest"),
                            var("be"),
                            var("bo"),
                            var("nav"),
                            var("t"),
                        ],
                    ),
                ),
            ),
        ]),
    );

    let resume_args = vec![
        var("myip"),
        var("frm"),
        var("dest"),
        var("be"),
        var("bo"),
        var("nav"),
    ];
    b.proc(
        "BackoffSlot",
        &["myip", "frm", "dest", "be", "bo", "nav", "t"],
        choice_all([
            guard(
                gt(now(), var("t")).and(medium_idle()),
                call(
                    "Backoff",
                    vec![
                        var("myip"),
                        var("frm"),
                        var("dest"),
                        var("be"),
                        sub(var("bo"), ilit(1)),
                        var("nav"),
                    ],
                ),
            ),
            guard(
                gt(now(), var("t")).and(medium_idle().not()),
                call("CcaResume", resume_args.clone()),
            ),
        ]),
    );

    b.proc(
        "CcaResume",
        &["myip", "frm", "dest", "be", "bo", "nav"],
        choice_all([
            serve_data(sifs, call("CcaResume", resume_args.clone())),
            overhear(rtsframe, call("CcaResume", resume_args.clone())),
            overhear(ctsframe, call("CcaResume", resume_args.clone())),
            answer_request(
                "CtsReplyResume",
                vec![var("frm"), var("dest"), var("be"), var("bo"), var("nav")],
            ),
            guard(
                medium_idle().and(gt(now(), var("nav"))),
                assign(
                    "t",
                    add(now(), ilit(difs)),
                    call(
                        "CcaResumeDifs",
                        vec![
                            var("myip"),
                            var("frm"),
                            var("dest"),
                            var("be"),
                            var("bo"),
                            var("nav"),
                            var("t"),
                        ],
                    ),
                ),
            ),
        ]),
    );

    b.proc(
        "CtsReplyResume",
        &["myip", "frm", "dest", "be", "bo", "nav", "source", "d", "t"],
        reply_body(
            call("CcaResume", resume_args.clone()),
            call("CcaResume", resume_args.clone()),
        ),
    );

    b.proc(
        "CcaResumeDifs",
        &["myip", "frm", "dest", "be", "bo", "nav", "t"],
        choice_all([
            guard(medium_idle().not(), call("CcaResume", resume_args.clone())),
            guard(
                medium_idle().and(ge(now(), var("t"))),
                call(
                    "Backoff",
                    vec![
                        var("myip"),
                        var("frm"),
                        var("dest"),
                        var("be"),
                        var("bo"),
                        var("nav"),
                    ],
                ),
            ),
        ]),
    );

    // Awaiting the clear: requests addressed here are ignored, data frames
    // cannot arrive, overheard traffic still maintains `nav`.
    let ctswait_args = vec![
        var("myip"),
        var("frm"),
        var("dest"),
        var("be"),
        var("nav"),
        var("dl"),
    ];
    b.proc(
        "CtsWait",
        &["myip", "frm", "dest", "be", "nav", "dl"],
        choice_all([
            guard(
                fresh(ctsframe(var("dest"), var("myip"), var("d"))),
                assign(
                    "t",
                    add(now(), ilit(sifs)),
                    guard(
                        ge(now(), var("t")),
                        transmit(
                            var("frm"),
                            assign(
                                "dl",
                                add(now(), ilit(params.ack_wait())),
                                call("AckWait", ctswait_args.clone()),
                            ),
                        ),
                    ),
                ),
            ),
            overhear(rtsframe, call("CtsWait", ctswait_args.clone())),
            overhear(ctsframe, call("CtsWait", ctswait_args.clone())),
            guard(
                gt(now(), var("dl")),
                call(
                    "Init",
                    vec![
                        var("myip"),
                        var("frm"),
                        var("dest"),
                        add(var("be"), ilit(1)),
                        var("nav"),
                    ],
                ),
            ),
        ]),
    );

    b.proc(
        "AckWait",
        &["myip", "frm", "dest", "be", "nav", "dl"],
        choice_all([
            guard(
                fresh(ackframe(var("dest"), var("myip"))),
                deliver(data_lit(Payload::TxSuccess), call("Main", main_args.clone())),
            ),
            overhear(rtsframe, call("AckWait", ctswait_args.clone())),
            overhear(ctsframe, call("AckWait", ctswait_args.clone())),
            guard(
                gt(now(), var("dl")),
                call(
                    "Init",
                    vec![
                        var("myip"),
                        var("frm"),
                        var("dest"),
                        add(var("be"), ilit(1)),
                        var("nav"),
                    ],
                ),
            ),
        ]),
    );

    b.compile()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DurationConfig;

    #[test]
    fn contention_window_grows_exponentially() {
        let p16 = CsmaParams { cwmin: 16, ..CsmaParams::default() };
        assert_eq!(cw_of(0, &p16), 16);
        let p1 = CsmaParams { cwmin: 1, ..CsmaParams::default() };
        assert_eq!(cw_of(0, &p1), 1);
        let p4 = CsmaParams { cwmin: 4, ..CsmaParams::default() };
        assert_eq!(cw_of(2, &p4), 16);
        for be in 0..8 {
            assert_eq!(cw_of(be + 1, &p4), 2 * cw_of(be, &p4));
        }
        let capped = CsmaParams { cwmin: 4, cwmax: Some(16), ..CsmaParams::default() };
        assert_eq!(cw_of(5, &capped), 16);
    }

    #[test]
    fn request_silence_covers_the_whole_exchange() {
        let p = CsmaParams::default(); // sifs 1, cts 1, ack 1, frame 3
        let d = rts_duration(Payload::User(0), NodeId(0), NodeId(1), &p);
        assert_eq!(d, 1 + 1 + 1 + 3 + 1 + 1);

        let minimal = CsmaParams {
            durations: DurationConfig { data: 1, ..DurationConfig::default() },
            ..CsmaParams::default()
        };
        assert_eq!(rts_duration(Payload::User(0), NodeId(0), NodeId(1), &minimal), 6);

        // Three interframe gaps, so doubling sifs adds exactly three.
        let doubled = CsmaParams { sifs: 2, difs: 3, ..CsmaParams::default() };
        let d2 = rts_duration(Payload::User(0), NodeId(0), NodeId(1), &doubled);
        assert_eq!(d2, d + 3);
    }

    #[test]
    fn parameter_validation_enforces_priorities() {
        // Acknowledgements would lose priority over new contention.
        let p = CsmaParams { difs: 1, sifs: 1, ..CsmaParams::default() };
        assert!(p.validate().is_err());
        let mut p = CsmaParams { cwmin: 0, ..CsmaParams::default() };
        assert!(p.validate().is_err());
        p.cwmin = 2;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn both_models_compile_and_support_clock_folding() {
        let params = CsmaParams::default();
        let basic = build_csma_defs(&params).unwrap();
        assert!(basic.normalizable, "time discipline must admit folding");
        assert!(basic.proc_by_name("Main").is_some());

        let rts = build_csma_rts_defs(&params).unwrap();
        assert!(rts.normalizable);
        for name in ["Main", "Init", "Cca", "Backoff", "CtsWait", "AckWait", "CtsReply"] {
            assert!(rts.proc_by_name(name).is_some(), "missing {name}");
        }
    }

    #[test]
    fn unbounded_retries_drop_the_failure_branch() {
        let params = CsmaParams { max_retransmit: None, ..CsmaParams::default() };
        assert!(build_csma_defs(&params).is_ok());
        assert!(build_csma_rts_defs(&params).is_ok());
    }
}
