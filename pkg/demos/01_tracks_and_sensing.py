"""A quick tour of the simulator pieces: a generated track, where a car sits on
it, what the LiDAR sees from there and what Follow-the-Gap would do about it."""
import numpy as np

from overtake_rl.ftg import ftg_control
from overtake_rl.lidar import average_filter, build_observation, raycast
from overtake_rl.tracks import eval_track, training_tracks
from overtake_rl.vehicle import VehicleParams, footprint, spawn_state

tracks = training_tracks()
print(len(tracks), "training tracks, widths", sorted({t.width for t in tracks}))

trk = eval_track()
print(trk.id, "length %.1f m, %d waypoints" % (trk.total_length, trk.n_waypoints))

# park the ego car on waypoint 40 and put another car 3 waypoints ahead
p = VehicleParams()
pos, heading = trk.waypoint_pose(40)
ego = spawn_state(pos, heading, p)
other_pos, other_heading = trk.waypoint_pose(43)
other = spawn_state(other_pos, other_heading, p)

proj = trk.project(ego.position)
print("arc length %.2f m, lateral offset %.3f m" % (proj.arc_length, proj.lateral_offset))

scan = raycast(trk.wall_segments, [footprint(other, p)], ego, 1080, 10.0)
print("closest return %.2f m at %.1f deg" % (scan.ranges.min(), np.degrees(scan.angles[scan.ranges.argmin()])))

# the agent only ever sees 10 averaged sectors plus its own speed and steering
beams = average_filter(scan)
print("averaged beams", np.round(beams, 2))
print("observation", np.round(build_observation(ego.speed, ego.steering_angle, beams), 3))

act = ftg_control(scan)
print("FTG says: %.2f m/s, steer %.3f rad" % (act.target_speed, act.target_steering))
