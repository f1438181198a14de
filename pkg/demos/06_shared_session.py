"""Three clients share one scene through the service and converge bit for bit.

An AR viewer builds the scene, a haptic client streams hand updates, an
observer just watches; every replica ends up byte-identical with the
service's own state.
"""

from harp import (HandState, LocalClient, Node, NodeDelta, SessionService, Transform,
                  Vec3, make_primitive)
from harp.model import InteractionEvent

service = SessionService(clock=lambda: 0.0)
viewer = LocalClient(service, "viewer", "ar-view")
hand = LocalClient(service, "hand-bridge", "haptic")
observer = LocalClient(service, "observer", "observer")

session = viewer.create_session()
for client in (viewer, hand, observer):
    client.join(session)

viewer.submit_delta(NodeDelta.add(Node(
    id="exhibit", mesh=make_primitive("octahedron"),
    transform=Transform(position=Vec3(0, 0, 0.17)))))

hand.publish_hand(HandState(palm_position=Vec3(0, 0, 0.2), timestamp=0.0))
hand.publish_event(InteractionEvent(
    event_id="touch-1", session_id=session, source_client_id="hand-bridge",
    target_node_id="exhibit", kind="touch", timestamp=0.0))

print("revision:", service.session_status(session).revision)
print("viewer  == service:", viewer.replica_canonical()
      == observer.replica_canonical())
for client in (viewer, hand, observer):
    events = [e.kind for e in client.events if "system" not in e.payload]
    print(f"{client.client_id:12s} sees events {events} "
          f"and {len(client.replica.nodes)} nodes")
