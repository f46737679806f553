"""
A trusted in-process message bus standing in for the secure channels between entities.

The protocol assumes every channel is secure and reliable, so nothing here encrypts anything.
What the bus does instead is keep an access log, so a test can check that every message was
delivered exactly once and that nobody but its receiver ever looked at it.
"""

from collections import deque, namedtuple
import logging

from encrypto.errors import ChannelViolation


log = logging.getLogger(__name__)


class Envelope(namedtuple("Envelope", ["id", "sender", "receiver", "kind", "body"])):
  """A message in flight."""

  def __repr__(self):
    return "<Envelope %d %s %s->%s>" % (self.id, self.kind, self.sender, self.receiver)


class Delivery(object):
  """
  A message as handed to a reader by `Mailbox`.

  The body is read through `.value`, or as the `as` value of a `with` block. Leaving the block
  normally acknowledges the message; leaving it with an exception puts the message back at the
  head of the mailbox.

  .. code-block:: python

     for delivery in bus.mailbox("ttp:0"):
       with delivery as packet:
         inbox.append(packet)
  """

  def __init__(self, bus, envelope, reader):
    self._bus = bus
    self._envelope = envelope
    self._reader = reader

  @property
  def envelope(self):
    return self._envelope

  @property
  def value(self):
    self._bus._record_read(self._reader, self._envelope)
    return self._envelope.body

  def complete(self):
    self._bus._ack(self._reader, self._envelope)

  def abort(self):
    """Admit a failure to process this message and put it back."""
    self._bus._requeue(self._envelope)

  def __enter__(self):
    return self.value

  def __exit__(self, type, value, traceback):
    if type is None and value is None and traceback is None:
      self.complete()
    else:
      self.abort()


class Mailbox(object):
  """Iterates over the messages waiting for one address, in the order they were sent."""

  def __init__(self, bus, address, reader):
    self._bus = bus
    self._address = address
    self._reader = reader

  def __iter__(self):
    return self

  def __len__(self):
    return len(self._bus._queues.get(self._address, ()))

  def __next__(self):
    queue = self._bus._queues.get(self._address)
    if not queue:
      raise StopIteration
    return Delivery(self._bus, queue.popleft(), self._reader)

  next = __next__


class SecureBus(object):
  """Per-address FIFO mailboxes with an access log."""

  def __init__(self):
    self._queues = {}
    self._sent = {}
    self._acks = {}
    self.access_log = []

  def send(self, sender, receiver, kind, body):
    msg_id = len(self._sent)
    envelope = Envelope(msg_id, sender, receiver, kind, body)
    self._sent[msg_id] = envelope
    self._queues.setdefault(receiver, deque()).append(envelope)
    return msg_id

  def broadcast(self, sender, receivers, kind, body):
    return [self.send(sender, receiver, kind, body) for receiver in receivers]

  def mailbox(self, address, reader=None):
    """The mailbox of `address`. `reader` defaults to the address itself."""
    return Mailbox(self, address, reader or address)

  def receive_all(self, address):
    """Read and acknowledge everything waiting for address. Returns (sender, body) pairs."""

    got = []
    for delivery in self.mailbox(address):
      with delivery as body:
        got.append((delivery.envelope.sender, body))
    return got

  def pending(self):
    return sum(len(q) for q in self._queues.values())

  def _record_read(self, reader, envelope):
    self.access_log.append((reader, envelope.id))

  def _ack(self, reader, envelope):
    self._acks[envelope.id] = self._acks.get(envelope.id, 0) + 1

  def _requeue(self, envelope):
    self._queues.setdefault(envelope.receiver, deque()).appendleft(envelope)

  def audit(self):
    """Raise ChannelViolation unless every message was delivered once, to its receiver only."""

    for reader, msg_id in self.access_log:
      envelope = self._sent[msg_id]
      if reader != envelope.receiver:
        raise ChannelViolation("%s read %r" % (reader, envelope))

    for msg_id, envelope in self._sent.items():
      acks = self._acks.get(msg_id, 0)
      if acks != 1:
        raise ChannelViolation("%r was delivered %d times" % (envelope, acks))

    log.debug("Bus audit passed for %d messages", len(self._sent))
    return True
