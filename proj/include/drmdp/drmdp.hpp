#pragma once

#include "drmdp/adversary.hpp"
#include "drmdp/distances.hpp"
#include "drmdp/empirical.hpp"
#include "drmdp/experiments.hpp"
#include "drmdp/guarantees.hpp"
#include "drmdp/io.hpp"
#include "drmdp/model.hpp"
#include "drmdp/radius.hpp"
#include "drmdp/robust.hpp"
