import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dea_analysis.settings')
django.setup()
