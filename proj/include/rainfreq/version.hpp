#pragma once

#define RAINFREQ_VERSION "0.1.0"
