#pragma once

#include "lbvc/errors.hpp"
#include "lbvc/frame.hpp"
#include "lbvc/flow.hpp"
#include "lbvc/frame_io.hpp"
#include "lbvc/flow_estimator.hpp"
#include "lbvc/synthetic.hpp"
#include "lbvc/ame.hpp"
#include "lbvc/metrics.hpp"
#include "lbvc/amp.hpp"
#include "lbvc/range_coder.hpp"
#include "lbvc/motion_codec.hpp"
#include "lbvc/gop.hpp"
#include "lbvc/pipeline.hpp"
#include "lbvc/report.hpp"
