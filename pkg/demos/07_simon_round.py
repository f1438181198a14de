"""A headless Simon round: scripted player, real wire path, logical clock.

The engine replicates the four buttons into the session, the scripted player
steers a virtual hand through press choreographies, and every press travels
through the service as an interaction event before it reaches the game.
"""

from harp.apps import simon_round_run

print("perfect player, 60 s round:")
result = simon_round_run(duration=60.0, seed=7, policy="perfect")
print(f"  correct sequences: {result['correct_sequences']}")
print(f"  fails:             {result['fails']}")
print(f"  final HUD:         {result['hud']['simon_sequence']} "
      f"(cursor {result['hud']['simon_cursor']})")

print("\nbutton masher (always red), 20 s round:")
result = simon_round_run(duration=20.0, seed=0, policy="always-red", start_length=3)
print(f"  correct sequences: {result['correct_sequences']}")
print(f"  fails:             {result['fails']}")

print("\nturn taking, two scripted players, 40 s:")
result = simon_round_run(duration=40.0, seed=2, policy="perfect",
                         mode="turn_taking", n_players=2)
print(f"  correct sequences: {result['correct_sequences']}")
print(f"  fails:             {result['fails']}")
