use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc as std_mpsc, Arc, Condvar, Mutex, RwLock};
use std::time::{Duration, Instant};

use tokio::sync::{mpsc, Notify};

use crate::tally::Tally;

use super::{
    ActorId, AnyMessage, Crash, Effects, Envelope, Fault, HaltReason, Message, Receive,
    RuntimeError, TraceRecord, TraceSink,
};

thread_local! {
    static CURRENT: Cell<Option<ActorId>> = const { Cell::new(None) };
}

/// The id of the actor whose intent is running on this thread.
pub fn self_id() -> Result<ActorId, RuntimeError> {
    CURRENT.with(Cell::get).ok_or(RuntimeError::NotInActor)
}

struct EnterActor(Option<ActorId>);

impl EnterActor {
    fn new(id: ActorId) -> Self {
        EnterActor(CURRENT.with(|c| c.replace(Some(id))))
    }
}

impl Drop for EnterActor {
    fn drop(&mut self) {
        CURRENT.with(|c| c.set(self.0));
    }
}

type Inbox<T> = mpsc::UnboundedSender<T>;

enum Mailbox {
    Actor(Inbox<Envelope<AnyMessage>>),
    Client(Mutex<Option<std_mpsc::Sender<Envelope<AnyMessage>>>>),
}

#[derive(Default)]
struct Status {
    halted: Option<HaltReason>,
    observers: Vec<ActorId>,
}

struct Slot {
    mailbox: Mailbox,
    stop_requested: AtomicBool,
    wake: Notify,
    status: Mutex<Status>,
}

impl Slot {
    fn new(mailbox: Mailbox) -> Self {
        Slot {
            mailbox,
            stop_requested: AtomicBool::new(false),
            wake: Notify::new(),
            status: Mutex::new(Status::default()),
        }
    }

    fn is_client(&self) -> bool {
        matches!(self.mailbox, Mailbox::Client(_))
    }
}

#[derive(Default)]
struct Registry {
    slots: HashMap<ActorId, Arc<Slot>>,
    shut_down: bool,
}

struct Shared {
    executor: tokio::runtime::Handle,
    registry: RwLock<Registry>,
    next_id: AtomicU64,
    trace: Option<Arc<dyn TraceSink>>,
    live: Mutex<usize>,
    idle: Condvar,
    tally: Tally,
}

impl Shared {
    fn lookup(&self, id: ActorId) -> Result<Arc<Slot>, RuntimeError> {
        let registry = self.registry.read().unwrap();
        registry
            .slots
            .get(&id)
            .cloned()
            .ok_or(RuntimeError::UnknownRecipient(id))
    }

    fn deliver(
        &self,
        from: ActorId,
        to: ActorId,
        message: AnyMessage,
        user_send: bool,
    ) -> Result<(), RuntimeError> {
        let slot = {
            let registry = self.registry.read().unwrap();
            if user_send && registry.shut_down {
                return Err(RuntimeError::RuntimeShutDown);
            }
            registry
                .slots
                .get(&to)
                .cloned()
                .ok_or(RuntimeError::UnknownRecipient(to))?
        };
        if let Some(sink) = &self.trace {
            sink.record(TraceRecord::Send {
                from,
                to,
                message: &message,
            });
        }
        self.tally.record_sent();
        let envelope = Envelope {
            sender: from,
            message,
        };
        match &slot.mailbox {
            Mailbox::Actor(tx) => {
                // A closed mailbox means the actor halted: drop silently.
                if tx.send(envelope).is_err() {
                    self.settle(1);
                }
            }
            Mailbox::Client(tx) => {
                if let Some(tx) = tx.lock().unwrap().as_ref() {
                    let _ = tx.send(envelope);
                }
                // Client inboxes are outside the actor world.
                self.settle(1);
            }
        }
        Ok(())
    }

    fn return_to_sender(&self, me: ActorId, envelope: Envelope<AnyMessage>) {
        if envelope.message.is::<Fault>() {
            log::warn!(
                "{me} dropped an unhandled fault from {}: {}",
                envelope.sender,
                envelope.message
            );
            return;
        }
        let fault = Fault::TypeMismatch {
            offending_type: envelope.message.type_name(),
            recipient: me,
        };
        if let Err(err) = self.deliver(me, envelope.sender, AnyMessage::new(fault), false) {
            log::warn!("{me} could not return a message to sender: {err}");
        }
    }

    fn settle(&self, count: u64) {
        self.tally.settle(count);
    }

    fn request_stop(&self, slot: &Slot) {
        if !slot.stop_requested.swap(true, Ordering::AcqRel) {
            slot.wake.notify_one();
        }
    }

    /// Marks `id` halted and notifies its observers. Returns false if it had
    /// already halted.
    fn mark_halted(&self, id: ActorId, slot: &Slot, reason: HaltReason) -> bool {
        let observers = {
            let mut status = slot.status.lock().unwrap();
            if status.halted.is_some() {
                return false;
            }
            status.halted = Some(reason.clone());
            std::mem::take(&mut status.observers)
        };
        for observer in observers {
            self.notify_halt(id, observer, reason.clone());
        }
        true
    }

    fn notify_halt(&self, actor: ActorId, observer: ActorId, reason: HaltReason) {
        let fault = Fault::Halted { actor, reason };
        if let Err(err) = self.deliver(actor, observer, AnyMessage::new(fault), false) {
            log::warn!("halt notice for {actor} was not delivered: {err}");
        }
    }

    fn wait_live_at_most(&self, allowed: usize, deadline: Option<Instant>) -> bool {
        let mut live = self.live.lock().unwrap();
        while *live > allowed {
            match deadline {
                None => live = self.idle.wait(live).unwrap(),
                Some(deadline) => {
                    let now = Instant::now();
                    if now >= deadline {
                        return false;
                    }
                    live = self.idle.wait_timeout(live, deadline - now).unwrap().0;
                }
            }
        }
        true
    }
}

/// Configures and starts a [`Runtime`].
#[derive(Default)]
pub struct Builder {
    workers: Option<usize>,
    trace: Option<Arc<dyn TraceSink>>,
}

impl Builder {
    /// Number of executor threads. Defaults to the available parallelism,
    /// but never fewer than two.
    pub fn worker_threads(mut self, workers: usize) -> Self {
        self.workers = Some(workers.max(1));
        self
    }

    pub fn trace(mut self, sink: Arc<dyn TraceSink>) -> Self {
        self.trace = Some(sink);
        self
    }

    pub fn build(self) -> Result<Runtime, RuntimeError> {
        let workers = self.workers.unwrap_or_else(default_workers);
        let executor = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(workers)
            .thread_name("ringleader-actor")
            .build()
            .map_err(|err| RuntimeError::Executor(err.to_string()))?;
        let shared = Shared {
            executor: executor.handle().clone(),
            registry: RwLock::new(Registry::default()),
            next_id: AtomicU64::new(1),
            trace: self.trace,
            live: Mutex::new(0),
            idle: Condvar::new(),
            tally: Tally::new(),
        };
        Ok(Runtime {
            handle: RuntimeHandle {
                shared: Arc::new(shared),
            },
            executor: Some(executor),
        })
    }
}

pub(crate) fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(usize::from)
        .unwrap_or(2)
        .max(2)
}

/// Owns the executor. Dropping it shuts every actor down.
pub struct Runtime {
    handle: RuntimeHandle,
    executor: Option<tokio::runtime::Runtime>,
}

const DROP_GRACE: Duration = Duration::from_secs(5);

impl Runtime {
    pub fn new() -> Result<Self, RuntimeError> {
        Builder::default().build()
    }

    pub fn builder() -> Builder {
        Builder::default()
    }

    pub fn handle(&self) -> &RuntimeHandle {
        &self.handle
    }
}

impl Deref for Runtime {
    type Target = RuntimeHandle;

    fn deref(&self) -> &RuntimeHandle {
        &self.handle
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        if !self
            .handle
            .shutdown_until(Some(Instant::now() + DROP_GRACE))
        {
            log::warn!("actors still running after {DROP_GRACE:?}; abandoning them");
        }
        if let Some(executor) = self.executor.take() {
            executor.shutdown_background();
        }
    }
}

/// A cheap, cloneable reference to a running runtime, usable from any thread
/// or actor.
#[derive(Clone)]
pub struct RuntimeHandle {
    shared: Arc<Shared>,
}

impl fmt::Debug for RuntimeHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuntimeHandle")
            .field("live_actors", &self.live_actors())
            .field("envelopes_sent", &self.envelopes_sent())
            .finish()
    }
}

impl RuntimeHandle {
    /// Spawns an actor running `intent` from `initial`.
    ///
    /// The mailbox is installed before this returns, so anything sent to the
    /// new id afterwards is delivered.
    pub fn spawn<M, S, F>(&self, intent: F, initial: S) -> Result<ActorId, RuntimeError>
    where
        M: Receive,
        S: Send + 'static,
        F: FnMut(S, Envelope<M>, &mut Context) -> Result<S, Crash> + Send + 'static,
    {
        self.spawn_with(move |_| initial, intent)
    }

    /// Like [`spawn`](Self::spawn), but builds the initial state from the
    /// actor's own id before the loop starts.
    pub fn spawn_with<M, S, I, F>(&self, init: I, intent: F) -> Result<ActorId, RuntimeError>
    where
        M: Receive,
        S: Send + 'static,
        I: FnOnce(ActorId) -> S,
        F: FnMut(S, Envelope<M>, &mut Context) -> Result<S, Crash> + Send + 'static,
    {
        let (tx, rx) = mpsc::unbounded_channel();
        let slot = Arc::new(Slot::new(Mailbox::Actor(tx)));
        let id = {
            let mut registry = self.shared.registry.write().unwrap();
            if registry.shut_down {
                return Err(RuntimeError::RuntimeShutDown);
            }
            let id = ActorId::from_raw(self.shared.next_id.fetch_add(1, Ordering::SeqCst));
            registry.slots.insert(id, Arc::clone(&slot));
            *self.shared.live.lock().unwrap() += 1;
            id
        };
        let state = init(id);
        let task = run_loop(self.clone(), id, slot, rx, intent, state);
        self.shared.executor.spawn(task);
        Ok(id)
    }

    /// Registers an external handle that can send and receive envelopes.
    pub fn client(&self) -> Result<Client, RuntimeError> {
        let (tx, rx) = std_mpsc::channel();
        let slot = Arc::new(Slot::new(Mailbox::Client(Mutex::new(Some(tx)))));
        let mut registry = self.shared.registry.write().unwrap();
        if registry.shut_down {
            return Err(RuntimeError::RuntimeShutDown);
        }
        let id = ActorId::from_raw(self.shared.next_id.fetch_add(1, Ordering::SeqCst));
        registry.slots.insert(id, slot);
        Ok(Client {
            id,
            runtime: self.clone(),
            inbox: rx,
        })
    }

    /// Halts `target` before it processes any further envelope. Pending
    /// envelopes are discarded. Stopping a halted actor does nothing.
    pub fn stop(&self, target: ActorId) -> Result<(), RuntimeError> {
        let slot = self.shared.lookup(target)?;
        if slot.is_client() {
            self.halt_client(target, &slot, HaltReason::Stopped);
        } else {
            self.shared.request_stop(&slot);
        }
        Ok(())
    }

    /// Arranges for `observer` to receive a [`Fault::Halted`] when `target`
    /// halts. If it already has, the notice is sent right away.
    pub fn on_halt(&self, target: ActorId, observer: ActorId) -> Result<(), RuntimeError> {
        let slot = self.shared.lookup(target)?;
        self.shared.lookup(observer)?;
        let already = {
            let mut status = slot.status.lock().unwrap();
            match &status.halted {
                Some(reason) => Some(reason.clone()),
                None => {
                    status.observers.push(observer);
                    None
                }
            }
        };
        if let Some(reason) = already {
            self.shared.notify_halt(target, observer, reason);
        }
        Ok(())
    }

    /// Stops every actor and waits until all of them have finished. Further
    /// spawns and sends fail with [`RuntimeError::RuntimeShutDown`].
    ///
    /// Called from inside an actor, it waits for every other actor; the
    /// caller halts once its current invocation returns.
    pub fn shutdown(&self) {
        self.shutdown_until(None);
    }

    fn shutdown_until(&self, deadline: Option<Instant>) -> bool {
        let slots: Vec<Arc<Slot>> = {
            let mut registry = self.shared.registry.write().unwrap();
            registry.shut_down = true;
            registry
                .slots
                .values()
                .filter(|slot| !slot.is_client())
                .cloned()
                .collect()
        };
        for slot in &slots {
            self.shared.request_stop(slot);
        }
        match self_id() {
            Ok(_) if tokio::runtime::Handle::try_current().is_ok() => {
                tokio::task::block_in_place(|| self.shared.wait_live_at_most(1, deadline))
            }
            Ok(_) => self.shared.wait_live_at_most(1, deadline),
            Err(_) => self.shared.wait_live_at_most(0, deadline),
        }
    }

    pub fn is_shut_down(&self) -> bool {
        self.shared.registry.read().unwrap().shut_down
    }

    /// Number of actor tasks that have not yet finished.
    pub fn live_actors(&self) -> usize {
        *self.shared.live.lock().unwrap()
    }

    /// Blocks until no actor task is running, or `timeout` passes.
    pub fn wait_idle(&self, timeout: Duration) -> bool {
        self.shared
            .wait_live_at_most(0, Some(Instant::now() + timeout))
    }

    /// Total envelopes accepted by `send`, including runtime notices.
    pub fn envelopes_sent(&self) -> u64 {
        self.shared.tally.sent()
    }

    /// Blocks until every sent envelope has been processed or discarded, or
    /// `timeout` passes. Only meaningful once external senders are done.
    pub fn wait_quiescent(&self, timeout: Duration) -> bool {
        self.shared.tally.wait_quiescent(timeout)
    }

    pub fn trace_sink(&self) -> Option<&Arc<dyn TraceSink>> {
        self.shared.trace.as_ref()
    }

    pub fn is_tracing(&self) -> bool {
        self.shared.trace.is_some()
    }

    fn emit(&self, line: fmt::Arguments<'_>) {
        if let Some(sink) = &self.shared.trace {
            sink.record(TraceRecord::Event(line));
        }
    }

    fn halt_client(&self, id: ActorId, slot: &Slot, reason: HaltReason) {
        if let Mailbox::Client(tx) = &slot.mailbox {
            tx.lock().unwrap().take();
        }
        self.shared.mark_halted(id, slot, reason);
    }
}

async fn run_loop<M, S, F>(
    runtime: RuntimeHandle,
    me: ActorId,
    slot: Arc<Slot>,
    mut mailbox: mpsc::UnboundedReceiver<Envelope<AnyMessage>>,
    mut intent: F,
    mut state: S,
) where
    M: Receive,
    S: Send + 'static,
    F: FnMut(S, Envelope<M>, &mut Context) -> Result<S, Crash> + Send + 'static,
{
    let mut cx = Context {
        me,
        runtime: runtime.clone(),
    };
    let shared = &runtime.shared;
    let reason = loop {
        if slot.stop_requested.load(Ordering::Acquire) {
            break HaltReason::Stopped;
        }
        let envelope = tokio::select! {
            biased;
            _ = slot.wake.notified() => continue,
            received = mailbox.recv() => match received {
                Some(envelope) => envelope,
                None => break HaltReason::Normal,
            },
        };
        if slot.stop_requested.load(Ordering::Acquire) {
            shared.settle(1);
            break HaltReason::Stopped;
        }
        let Envelope { sender, message } = envelope;
        let message = match M::receive(message) {
            Ok(message) => message,
            Err(payload) => {
                shared.return_to_sender(
                    me,
                    Envelope {
                        sender,
                        message: payload,
                    },
                );
                shared.settle(1);
                continue;
            }
        };
        let outcome = {
            let _entered = EnterActor::new(me);
            panic::catch_unwind(AssertUnwindSafe(|| {
                intent(state, Envelope { sender, message }, &mut cx)
            }))
        };
        shared.settle(1);
        match outcome {
            Ok(Ok(next)) => state = next,
            Ok(Err(crash)) => break HaltReason::Crashed(crash.reason().to_owned()),
            Err(payload) => break HaltReason::Crashed(panic_message(payload.as_ref())),
        }
    };

    mailbox.close();
    let mut discarded = 0;
    while mailbox.try_recv().is_ok() {
        discarded += 1;
    }
    if discarded > 0 {
        shared.settle(discarded);
    }
    shared.mark_halted(me, &slot, reason);
    drop(mailbox);

    let mut live = shared.live.lock().unwrap();
    *live -= 1;
    shared.idle.notify_all();
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".to_owned()
    }
}

/// The runtime's view from inside an intent.
pub struct Context {
    me: ActorId,
    runtime: RuntimeHandle,
}

impl Context {
    pub fn self_id(&self) -> ActorId {
        self.me
    }

    pub fn runtime(&self) -> &RuntimeHandle {
        &self.runtime
    }

    pub fn send<M: Message>(&self, to: ActorId, message: M) -> Result<(), RuntimeError> {
        self.runtime
            .shared
            .deliver(self.me, to, AnyMessage::new(message), true)
    }

    pub fn stop(&self, target: ActorId) -> Result<(), RuntimeError> {
        self.runtime.stop(target)
    }

    pub fn on_halt(&self, target: ActorId) -> Result<(), RuntimeError> {
        self.runtime.on_halt(target, self.me)
    }
}

impl Effects for Context {
    fn self_id(&self) -> ActorId {
        self.me
    }

    fn send_any(&mut self, to: ActorId, message: AnyMessage) -> Result<(), RuntimeError> {
        self.runtime.shared.deliver(self.me, to, message, true)
    }

    fn emit(&mut self, line: fmt::Arguments<'_>) {
        self.runtime.emit(line);
    }

    fn reject(&mut self, envelope: Envelope<AnyMessage>) {
        self.runtime.shared.return_to_sender(self.me, envelope);
    }
}

/// A handle for code outside the actor world: it has an id, can send, and
/// has an inbox for replies, faults, and halt notices.
pub struct Client {
    id: ActorId,
    runtime: RuntimeHandle,
    inbox: std_mpsc::Receiver<Envelope<AnyMessage>>,
}

impl Client {
    pub fn id(&self) -> ActorId {
        self.id
    }

    pub fn runtime(&self) -> &RuntimeHandle {
        &self.runtime
    }

    pub fn send<M: Message>(&self, to: ActorId, message: M) -> Result<(), RuntimeError> {
        self.send_any(to, AnyMessage::new(message))
    }

    pub fn send_any(&self, to: ActorId, message: AnyMessage) -> Result<(), RuntimeError> {
        self.runtime.shared.deliver(self.id, to, message, true)
    }

    pub fn recv_timeout(&self, timeout: Duration) -> Option<Envelope<AnyMessage>> {
        self.inbox.recv_timeout(timeout).ok()
    }

    pub fn try_recv(&self) -> Option<Envelope<AnyMessage>> {
        self.inbox.try_recv().ok()
    }

    /// Emits an event line on the runtime's trace sink.
    pub fn emit(&self, line: fmt::Arguments<'_>) {
        self.runtime.emit(line);
    }
}

impl Drop for Client {
    fn drop(&mut self) {
        if let Ok(slot) = self.runtime.shared.lookup(self.id) {
            self.runtime.halt_client(self.id, &slot, HaltReason::Normal);
        }
    }
}

impl fmt::Debug for Client {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Client").field("id", &self.id).finish()
    }
}
