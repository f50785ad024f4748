"""
Django settings for estateqa project.

Generated by 'django-admin startproject' using Django 5.2.4.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()
# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# Quick-start development settings - unsuitable for production
# See https://docs.djangoproject.com/en/5.2/howto/deployment/checklist/

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("SECRET_KEY", "django-insecure")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("DEBUG", "1") == "1"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    "rest_framework",
    "domain",
    "geostore",
    "toolcache",
    "qagen",
    "slu",
    "agents",
    "dbagent",
    "mapagent",
    "evaluation",
]

# API только читает данные: кеш инструментов и SQL-представления
REST_FRAMEWORK = {
    "DEFAULT_AUTHENTICATION_CLASSES": [],
    "DEFAULT_PERMISSION_CLASSES": [
        "rest_framework.permissions.AllowAny",
    ],
    "UNAUTHENTICATED_USER": None,
}

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "estateqa.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "estateqa.wsgi.application"


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases
# Встроенная СУБД: генератор и агенты пишут SQL только на диалекте SQLite

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": os.environ.get("DB_NAME", BASE_DIR / "estateqa.sqlite3"),
    }
}


# Password validation
# https://docs.djangoproject.com/en/5.2/ref/settings/#auth-password-validators

AUTH_PASSWORD_VALIDATORS = [
    {
        "NAME": "django.contrib.auth.password_validation.UserAttributeSimilarityValidator",
    },
    {
        "NAME": "django.contrib.auth.password_validation.MinimumLengthValidator",
    },
    {
        "NAME": "django.contrib.auth.password_validation.CommonPasswordValidator",
    },
    {
        "NAME": "django.contrib.auth.password_validation.NumericPasswordValidator",
    },
]


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True


# Static files (CSS, JavaScript, Images)
# https://docs.djangoproject.com/en/5.2/howto/static-files/

STATIC_URL = "static/"

# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging

LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}


# Пути к артефактам конвейера

QA_FIXTURE_DIR = Path(os.environ.get("QA_FIXTURE_DIR", BASE_DIR / "data" / "fixtures"))
QA_TEMPLATE_DIR = Path(
    os.environ.get("QA_TEMPLATE_DIR", BASE_DIR / "qagen" / "catalog")
)
QA_DATASET_DIR = Path(os.environ.get("QA_DATASET_DIR", BASE_DIR / "data" / "dataset"))
QA_RUNS_DIR = Path(os.environ.get("QA_RUNS_DIR", BASE_DIR / "data" / "runs"))
QA_CACHE_FILE = Path(
    os.environ.get("QA_CACHE_FILE", BASE_DIR / "data" / "tool_cache.jsonl")
)


# Хранилище: города, радиусы пар, сид фикстур

QA_CITIES = [
    city.strip()
    for city in os.environ.get("QA_CITIES", "Guangzhou,Shenzhen").split(",")
    if city.strip()
]
POI_PAIRING_RADIUS = float(os.environ.get("POI_PAIRING_RADIUS", 3000))
COMMUNITY_PAIRING_RADIUS = float(os.environ.get("COMMUNITY_PAIRING_RADIUS", 1000))
FIXTURE_SEED = int(os.environ.get("FIXTURE_SEED", 7))
FIXTURE_COMMUNITIES_PER_CITY = int(os.environ.get("FIXTURE_COMMUNITIES_PER_CITY", 200))
FIXTURE_POIS_PER_CITY = int(os.environ.get("FIXTURE_POIS_PER_CITY", 150))

# Центры городов (широта, долгота) и районы для синтетических фикстур
CITY_PROFILES = {
    "Beijing": {
        "center": (39.9042, 116.4074),
        "districts": ["Chaoyang", "Haidian", "Dongcheng", "Xicheng", "Fengtai"],
    },
    "Guangzhou": {
        "center": (23.1291, 113.2644),
        "districts": ["Tianhe", "Yuexiu", "Haizhu", "Baiyun", "Panyu"],
    },
    "Shenzhen": {
        "center": (22.5431, 114.0579),
        "districts": ["Futian", "Nanshan", "Luohu", "Bao'an", "Longgang"],
    },
    "Suzhou": {
        "center": (31.2990, 120.5853),
        "districts": ["Gusu", "Wuzhong", "Xiangcheng", "Huqiu", "Wujiang"],
    },
    "Hangzhou": {
        "center": (30.2741, 120.1551),
        "districts": ["Xihu", "Shangcheng", "Gongshu", "Binjiang", "Xiaoshan"],
    },
    "Wuhan": {
        "center": (30.5928, 114.3055),
        "districts": ["Wuchang", "Jiang'an", "Jianghan", "Hongshan", "Qiaokou"],
    },
    "Nanjing": {
        "center": (32.0603, 118.7969),
        "districts": ["Xuanwu", "Qinhuai", "Jianye", "Gulou", "Qixia"],
    },
    "Tianjin": {
        "center": (39.3434, 117.3616),
        "districts": ["Heping", "Hexi", "Nankai", "Hedong", "Binhai"],
    },
}

# Шесть категорий POI и уточнённые метки
POI_TAXONOMY = {
    "school": ["primary school", "middle school", "kindergarten"],
    "hospital": ["general hospital", "community clinic"],
    "supermarket": ["supermarket", "convenience store"],
    "shopping_mall": ["shopping mall"],
    "park": ["city park"],
    "transit": ["subway station", "bus stop"],
}

PROPERTY_TYPES = ["residential", "villa", "apartment", "commercial"]
SALES_STATUSES = ["on_sale", "sold_out", "upcoming"]


# Кеш инструментов

TOOL_COLLECTION_DATE = os.environ.get("TOOL_COLLECTION_DATE", "2025-03-12")
TOOL_CACHE_LIVE_PROVIDER = os.environ.get("TOOL_CACHE_LIVE_PROVIDER", "0") == "1"
TOOL_CACHE_MEMO_SIZE = int(os.environ.get("TOOL_CACHE_MEMO_SIZE", 4096))


# Генерация QA

GENERATION_SEED = int(os.environ.get("GENERATION_SEED", 2024))
GENERATION_ATTEMPTS_PER_TEMPLATE = int(
    os.environ.get("GENERATION_ATTEMPTS_PER_TEMPLATE", 90)
)
SPLIT_SEED = int(os.environ.get("SPLIT_SEED", 13))
SPLIT_RATIOS = (8, 1, 1)
PLAUSIBILITY_WALKING_LIMIT = float(os.environ.get("PLAUSIBILITY_WALKING_LIMIT", 10000))
PLAUSIBILITY_CYCLING_LIMIT = float(os.environ.get("PLAUSIBILITY_CYCLING_LIMIT", 20000))

# Схема слотов и интентов (не канонические, настраиваемые)
QA_SLOT_TYPES = [
    "city",
    "district",
    "community_name",
    "poi_name",
    "poi_label",
    "transport_mode",
    "distance_kind",
    "property_type",
    "radius",
    "count_limit",
    "duration_limit",
    "price",
]
QA_INTENTS = [
    "price_inquiry",
    "community_profile",
    "district_statistics",
    "neighborhood_search",
    "cross_property_comparison",
    "commute_time",
    "commute_distance",
    "rush_hour_commute",
    "amenity_search",
    "amenity_proximity",
]
# Плейсхолдер шаблона -> тип слота, если имена различаются
QA_PLACEHOLDER_SLOTS = {"X": "count_limit"}


# Front-end SLU

SLU_TRANSPORT_MODES = ["walking", "cycling", "driving", "transit"]
SLU_DISTANCE_KINDS = ["straight", "walking", "driving"]
# Шаблоны для чисел и контекстных слов: (тип слота, регулярное выражение с одной группой)
SLU_PATTERNS = [
    ("distance_kind", r"\b(straight|walking|driving) distance\b"),
    ("count_limit", r"\bnearest (\d+)\b"),
    ("radius", r"\bwithin (\d+) meters\b"),
    ("duration_limit", r"\bwithin (\d+) minutes\b"),
    ("price", r"\bbelow (\d+) yuan\b"),
]
SLU_FEWSHOT_EXAMPLES = 26


# Агенты

LLM_ENDPOINT = os.environ.get("LLM_ENDPOINT", "")
LLM_MODEL = os.environ.get("LLM_MODEL", "")
LLM_API_KEY_ENV = os.environ.get("LLM_API_KEY_ENV", "LLM_API_KEY")
LLM_TIMEOUT = float(os.environ.get("LLM_TIMEOUT", 60))
AGENT_STEP_CAP = int(os.environ.get("AGENT_STEP_CAP", 25))
MAP_AGENT_ATTEMPT_CAP = int(os.environ.get("MAP_AGENT_ATTEMPT_CAP", 3))
BM25_K1 = float(os.environ.get("BM25_K1", 1.2))
BM25_B = float(os.environ.get("BM25_B", 0.75))
CAPTION_TOP_K = int(os.environ.get("CAPTION_TOP_K", 1))
# Соглашения об именах колонок для извлечения координат
COORDINATE_COLUMNS = {
    "name": ["name", "community_name", "poi_name", "neighbor_name"],
    "latitude": ["latitude", "lat"],
    "longitude": ["longitude", "lon", "lng"],
}


# Оценка

EVAL_PARALLELISM = int(os.environ.get("EVAL_PARALLELISM", 1))
EVAL_SPLIT = os.environ.get("EVAL_SPLIT", "test")
EVAL_SLU_STRATEGY = os.environ.get("EVAL_SLU_STRATEGY", "lexicon")
EVAL_METHOD = os.environ.get("EVAL_METHOD", "supervisor")
EVAL_SEED = int(os.environ.get("EVAL_SEED", 2024))
