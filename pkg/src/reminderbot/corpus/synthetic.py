"""Synthetic raw chat logs shaped like production reminder traffic.

Conversations carry natural orthography (capitals, punctuation, clock
surfaces), human- and graph-attributed assistant turns, mid-flow deviations,
out-of-domain asides, notification pushes, and a slice of other-domain
traffic, so every pipeline step has real work to do. The deviation and
out-of-domain line pools are shared with the simulation harness: models
trained on this corpus face the same flavor of nuisance text at evaluation
time, which mirrors how the production system trains on its own traffic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, timedelta

from ..core.messages import (
    Conversation,
    Message,
    MessageKind,
    Responder,
    Sender,
    new_message_id,
)

DEVIATION_LINES = (
    "btw kaun jeeta kal ka ipl match",
    "arre yaar ek minute ruko",
    "wait pehle ye batao kitna time lagega",
    "haha lol thik hai chalo",
    "hmm soch raha hoon abhi",
)
OUT_OF_DOMAIN_LINES = (
    "recharge mera jio number abhi",
    "paytm cashback kab aayega",
    "chicken biryani order karna hai dominos se",
    "flight ticket mumbai se delhi kitne ka hai",
    "movie tickets chahiye weekend ke liye",
)
CODEMIX_MAP = {
    "please": "plz",
    "reminder": "yaad",
    "remind": "yaad dilao",
    "wake": "utha",
    "morning": "subah",
    "cancel": "hatao",
    "show": "dikhao",
    "set": "laga do",
}

DEVIATION_REPLIES = (
    "No worries! Tell me what reminder you need.",
    "Haha sure. What reminder should I set for you?",
    "I can help with reminders here. What should I set up?",
)
OOD_REPLIES = (
    "I can help with reminders only. Tell me what to set up.",
    "That one is outside my desk! Any reminder I can set for you?",
)
UNFAVORABLE_REPLY = "Sorry I cannot help you with that."

GREETING_OPENERS = ("hi", "hello", "hey", "good morning")
GREETING_REPLIES = (
    "Hello! How may I help you?",
    "Hi! Tell me what I can do for you.",
)
CLOSING_LINES = ("thanks", "thank you", "ok thanks", "great thanks")
CLOSING_REPLIES = (
    "Most welcome! Have a great day ahead.",
    "Happy to help! Good day.",
)

# surfaces paired with the pretty form a human agent would echo in the ack
TIME_SURFACES = (
    ("7 am", "7:00 AM"),
    ("9 am", "9:00 AM"),
    ("2 pm", "2:00 PM"),
    ("6:15 am", "6:15 AM"),
    ("8:30 pm", "8:30 PM"),
    ("10 pm", "10:00 PM"),
)
DATE_SURFACES = (("today", "today"), ("tomorrow", "tomorrow"))
FREQ_SURFACES = (
    ("every 2 hours", "every 2 hours"),
    ("every 3 hours", "every 3 hours"),
    ("daily", "every day"),
    ("every hour", "every hour"),
)

OFF_DOMAIN_SMALLTALK = (
    ("recharge", "I want to recharge my phone", "Your recharge of 199 is done."),
    ("food", "order me a veg pizza", "Your pizza order is placed."),
    ("travel", "book a cab to the airport", "Your cab is booked for the airport."),
)


@dataclass
class _Builder:
    rng: random.Random
    ts: int = 0

    def user(self, text: str) -> Message:
        self.ts += 1
        return Message(
            id=new_message_id(), sender=Sender.USER, kind=MessageKind.TEXT,
            body=text, timestamp=self.ts,
        )

    def agent(self, text: str, responder: Responder = Responder.HUMAN) -> Message:
        self.ts += 1
        return Message(
            id=new_message_id(), sender=Sender.ASSISTANT, kind=MessageKind.TEXT,
            body=text, timestamp=self.ts, responder=responder,
        )

    def push(self, text: str) -> Message:
        self.ts += 1
        return Message(
            id=new_message_id(), sender=Sender.ASSISTANT, kind=MessageKind.NOTIFICATION,
            body=text, timestamp=self.ts, responder=Responder.GRAPH,
        )


def _wakeup_flow(b: _Builder, rng: random.Random) -> tuple[list[Message], str]:
    t_user, t_pretty = rng.choice(TIME_SURFACES)
    ack = rng.choice((
        f"Done! We will wake you up via a call at {t_pretty}.",
        f"Sure, we will wake you up at {t_pretty}. Sleep well!",
    ))
    responder = rng.choice((Responder.GRAPH, Responder.HUMAN))
    if rng.random() < 0.5:
        d_user, _ = rng.choice(DATE_SURFACES)
        opener = rng.choice((
            f"Wake me up at {t_user} {d_user}",
            f"Please wake me up at {t_user} {d_user}",
            f"Can you wake me up at {t_user}?",
        ))
        msgs = [b.user(opener), b.agent(ack, responder)]
    else:
        msgs = [
            b.user(rng.choice(("I need a wake up call", "wake me up"))),
            b.agent("At what time should we wake you up?", responder),
            b.user(t_user),
            b.agent(ack, responder),
        ]
    return msgs, "_api_call_reminder_wakeup_"


def _medicine_flow(b: _Builder, rng: random.Random) -> tuple[list[Message], str]:
    t_user, t_pretty = rng.choice(TIME_SURFACES)
    d_user, d_pretty = rng.choice(DATE_SURFACES)
    ack = (
        f"Okay, done. We will remind you to take your medicine via a call at "
        f"{t_pretty} {d_pretty}. Take care!"
    )
    responder = rng.choice((Responder.GRAPH, Responder.HUMAN))
    if rng.random() < 0.5:
        msgs = [
            b.user(f"Remind me to take my medicine at {t_user} {d_user}"),
            b.agent(ack, responder),
        ]
    else:
        msgs = [
            b.user(rng.choice(("set a medicine reminder", "I need a medicine reminder"))),
            b.agent("At what time should I remind you to take your medicine?", responder),
            b.user(t_user),
            b.agent("On which date? You can also say today or tomorrow.", responder),
            b.user(d_user),
            b.agent(ack, responder),
        ]
    return msgs, "_api_call_reminder_medicine_"


def _water_flow(b: _Builder, rng: random.Random) -> tuple[list[Message], str]:
    f_user, f_pretty = rng.choice(FREQ_SURFACES)
    ack = f"Done! We will remind you to drink water {f_pretty}."
    responder = rng.choice((Responder.GRAPH, Responder.HUMAN))
    if rng.random() < 0.5:
        msgs = [b.user(f"Remind me to drink water {f_user}"), b.agent(ack, responder)]
    else:
        msgs = [
            b.user("remind me to drink water"),
            b.agent("How often should I remind you to drink water?", responder),
            b.user(f_user),
            b.agent(ack, responder),
        ]
    return msgs, "_api_call_reminder_drink_water_"


def _view_flow(b: _Builder, rng: random.Random) -> tuple[list[Message], str]:
    msgs = [
        b.user(rng.choice(("Show my reminders", "what are my reminders"))),
        b.agent("Here are your reminders:", rng.choice((Responder.GRAPH, Responder.HUMAN))),
    ]
    return msgs, "_api_view_reminders_"


def _cancel_flow(b: _Builder, rng: random.Random) -> tuple[list[Message], str]:
    responder = rng.choice((Responder.GRAPH, Responder.HUMAN))
    msgs = [
        b.user("Show my reminders"),
        b.agent("Here are your reminders:", responder),
        b.user(rng.choice(("cancel it", "cancel the last one", "cancel my wake up reminder"))),
        b.agent("Okay, I cancelled that reminder.", responder),
    ]
    return msgs, "_api_cancel_reminder_"


_FLOWS = (_wakeup_flow, _medicine_flow, _water_flow, _view_flow, _cancel_flow)


def _reminders_conversation(
    b: _Builder,
    rng: random.Random,
    deviation_rate: float,
    notification_rate: float,
) -> tuple[list[Message], str]:
    msgs: list[Message] = []
    if rng.random() < 0.4:
        msgs.append(b.user(rng.choice(GREETING_OPENERS)))
        msgs.append(b.agent(rng.choice(GREETING_REPLIES), Responder.GRAPH))
    if rng.random() < deviation_rate:
        line = rng.choice(DEVIATION_LINES + OUT_OF_DOMAIN_LINES)
        msgs.append(b.user(line))
        if rng.random() < 0.08:
            msgs.append(b.agent(UNFAVORABLE_REPLY, Responder.HUMAN))
        elif line in DEVIATION_LINES:
            msgs.append(b.agent(rng.choice(DEVIATION_REPLIES), Responder.HUMAN))
        else:
            msgs.append(b.agent(rng.choice(OOD_REPLIES), Responder.HUMAN))
    flow_msgs, tag = rng.choice(_FLOWS)(b, rng)
    msgs.extend(flow_msgs)
    if rng.random() < notification_rate:
        msgs.append(b.push("Reminder: it is time to drink water."))
        msgs.append(b.push("Reminder: time for your wake up call."))
    if rng.random() < 0.35:
        msgs.append(b.user(rng.choice(CLOSING_LINES)))
        msgs.append(b.agent(rng.choice(CLOSING_REPLIES), Responder.GRAPH))
    return msgs, tag


def _off_domain_conversation(b: _Builder, rng: random.Random) -> tuple[str, list[Message]]:
    domain, ask, reply = rng.choice(OFF_DOMAIN_SMALLTALK)
    return domain, [b.user(ask), b.agent(reply, Responder.HUMAN)]


def make_synthetic_raw(
    n: int,
    seed: int,
    base_day: date = date(2017, 4, 1),
    off_domain_rate: float = 0.1,
    deviation_rate: float = 0.2,
    notification_rate: float = 0.1,
) -> list[Conversation]:
    """``n`` raw conversations spread over a 28-day window."""
    if n < 1:
        raise ValueError("need at least one conversation")
    rng = random.Random(seed)
    out: list[Conversation] = []
    for i in range(n):
        b = _Builder(rng=rng)
        day = base_day + timedelta(days=i % 28)
        if rng.random() < off_domain_rate:
            domain, msgs = _off_domain_conversation(b, rng)
            out.append(
                Conversation(id=f"raw{i:05d}", messages=msgs, day=day, domain=domain)
            )
            continue
        msgs, tag = _reminders_conversation(b, rng, deviation_rate, notification_rate)
        out.append(
            Conversation(
                id=f"raw{i:05d}",
                messages=msgs,
                completed=True,
                completion_task=tag,
                day=day,
                domain="reminders",
            )
        )
    return out
