"""
Progress tracking for lumedepth commands
Tracks the stage of each job (one per CLI command) in a JSON file
"""
import json
from pathlib import Path
from typing import Dict, Optional
from datetime import datetime


class ProgressTracker:
    """Track progress for CLI jobs"""

    # Processing stages
    STAGES = {
        'queued': {'name': 'Queued', 'progress': 0},
        'loading': {'name': 'Loading Inputs', 'progress': 10},
        'optimizing': {'name': 'Optimizing', 'progress': 20},
        'writing': {'name': 'Writing Outputs', 'progress': 90},
        'completed': {'name': 'Completed', 'progress': 100},
        'failed': {'name': 'Failed', 'progress': 0}
    }

    def __init__(self, progress_file: Path):
        """
        Initialize progress tracker

        Args:
            progress_file: Path to JSON file for storing progress
        """
        self.progress_file = Path(progress_file)
        self.progress_file.parent.mkdir(parents=True, exist_ok=True)
        self._progress = self._load()

    @staticmethod
    def _empty() -> Dict:
        return {
            'jobs': {},
            'last_updated': None,
            'current_job': None,
        }

    def _load(self) -> Dict:
        """Load progress from file"""
        if self.progress_file.exists():
            try:
                with open(self.progress_file, 'r', encoding='utf-8') as f:
                    return json.load(f)
            except (OSError, json.JSONDecodeError):
                pass
        return self._empty()

    def _save(self):
        """Save progress to file"""
        self._progress['last_updated'] = datetime.now().isoformat()
        with open(self.progress_file, 'w', encoding='utf-8') as f:
            json.dump(self._progress, f, indent=2, ensure_ascii=False)

    def _job(self, job_id: str) -> Dict:
        if job_id not in self._progress['jobs']:
            self._progress['jobs'][job_id] = {
                'job_id': job_id,
                'stage': 'queued',
                'stage_name': self.STAGES['queued']['name'],
                'progress': 0,
                'message': 'Waiting to start...',
                'started_at': None,
                'completed_at': None,
                'errors': []
            }
        return self._progress['jobs'][job_id]

    def update_stage(self, job_id: str, stage: str, message: Optional[str] = None,
                     error: Optional[str] = None):
        """
        Update processing stage for a job

        Args:
            job_id: Job name (the CLI command and its main input)
            stage: Stage name (one of STAGES keys)
            message: Optional status message
            error: Optional error message
        """
        job = self._job(job_id)

        if stage in self.STAGES:
            job['stage'] = stage
            job['stage_name'] = self.STAGES[stage]['name']
            job['progress'] = self.STAGES[stage]['progress']

        if message:
            job['message'] = message

        if error:
            job['errors'].append(error)
            job['stage'] = 'failed'
            job['stage_name'] = self.STAGES['failed']['name']

        if job['started_at'] is None and stage != 'queued':
            job['started_at'] = datetime.now().isoformat()

        if job['stage'] in ['completed', 'failed']:
            job['completed_at'] = datetime.now().isoformat()

        self._progress['current_job'] = job_id
        self._save()

    def update_optimization_progress(self, job_id: str, current_step: int, total_steps: int):
        """Update progress during optimisation (step-by-step)"""
        if job_id not in self._progress['jobs']:
            return

        # Optimisation runs from 20% to 90%
        base_progress = 20
        optimization_range = 70
        step_progress = (current_step / total_steps) * optimization_range

        job = self._progress['jobs'][job_id]
        job['progress'] = base_progress + step_progress
        job['message'] = f"Step {current_step}/{total_steps}"
        self._save()

    def get_progress(self, job_id: Optional[str] = None) -> Dict:
        """
        Get progress for a specific job or all jobs

        Args:
            job_id: Optional job to get progress for

        Returns:
            Progress dictionary
        """
        if job_id:
            return self._progress['jobs'].get(job_id, {})
        return self._progress
