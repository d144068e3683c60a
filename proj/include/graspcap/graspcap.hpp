#pragma once

#include "graspcap/core/error.hpp"
#include "graspcap/core/json_io.hpp"
#include "graspcap/core/rigid_transform.hpp"
#include "graspcap/core/time.hpp"

#include "graspcap/timebase/audio.hpp"
#include "graspcap/timebase/band_power.hpp"
#include "graspcap/timebase/beep.hpp"
#include "graspcap/timebase/offset.hpp"

#include "graspcap/annotations/annotations.hpp"

#include "graspcap/rgbd/image_io.hpp"
#include "graspcap/rgbd/ply.hpp"
#include "graspcap/rgbd/point_cloud.hpp"

#include "graspcap/align/calibration.hpp"
#include "graspcap/align/icp.hpp"
#include "graspcap/align/kdtree.hpp"
#include "graspcap/align/procrustes.hpp"

#include "graspcap/kinematics/chain.hpp"
#include "graspcap/kinematics/contacts.hpp"
#include "graspcap/kinematics/joint_state.hpp"
#include "graspcap/kinematics/object_model.hpp"

#include "graspcap/grasps/grasp.hpp"
#include "graspcap/grasps/metrics.hpp"
#include "graspcap/grasps/resolve.hpp"

#include "graspcap/session/stats.hpp"
#include "graspcap/session/store.hpp"
