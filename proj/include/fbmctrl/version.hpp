#pragma once

#define FBMCTRL_VERSION "0.1.0"
