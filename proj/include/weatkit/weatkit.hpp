// weatkit.hpp : single include for the whole library
#pragma once

#include "embedding.hpp"
#include "errors.hpp"
#include "hardweat.hpp"
#include "lexicon.hpp"
#include "numkit.hpp"
#include "qualeval.hpp"
#include "reporting.hpp"
#include "softweat.hpp"
#include "weat.hpp"
