#pragma once

#include "camflow/audit/log.hpp"

namespace camflow::scenario {

/// Hand-built forensic trace on machine "host". Five entities: processes P1,
/// P2, P3 and files F1, F2. F2 and P1 start at [S={high}]; everything else is
/// unlabelled. Events, in order:
///   1  F1 -> P3   read
///   2  P3 -> P2   deliver
///   3  F2 -> P1   read
///   4  P1 -> P1   declassify high (P1 becomes unlabelled)
///   5  P1 -> F1   write
///   6  P1 -> P2   deliver
/// High data can only have reached P2 through P1's declassification: the
/// F1/P3 edges happened before anything high was written to F1.
audit::LogFile declassification_trace();

}  // namespace camflow::scenario
