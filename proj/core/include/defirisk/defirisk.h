#pragma once

#include "defirisk/allocate.h"
#include "defirisk/backtest.h"
#include "defirisk/date.h"
#include "defirisk/domain.h"
#include "defirisk/error.h"
#include "defirisk/fetch.h"
#include "defirisk/ingest.h"
#include "defirisk/report.h"
#include "defirisk/risk.h"
